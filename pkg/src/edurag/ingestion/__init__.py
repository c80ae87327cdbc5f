from .build import IngestConfig, build_edukg, expand_related_concepts, tag_wikipedia
from .deck import Slide, SlideDeck, parse_slide_deck
from .keyphrase import extract_main_concepts, rank_keyphrases
from .sources import Article, ArticleRef, ArticleSource, EmptySource, FixtureCorpus, WikipediaSource

__all__ = [
    "Article", "ArticleRef", "ArticleSource", "EmptySource", "FixtureCorpus", "IngestConfig", "Slide",
    "SlideDeck", "WikipediaSource", "build_edukg", "expand_related_concepts", "extract_main_concepts",
    "parse_slide_deck", "rank_keyphrases", "tag_wikipedia",
]
