"""Graph RAG over educational knowledge graphs built from slide decks."""

__version__ = "0.1.0"
