"""Bridge from pretrained contextual encoders to the core tagger's
file-backed emission format."""

from .export import ExportJob, export_emissions

__version__ = "0.1.0"

__all__ = ["ExportJob", "export_emissions", "__version__"]
