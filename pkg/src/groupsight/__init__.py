"""groupsight: discussion analytics with semantic artifacts, fused retrieval,
a bounded evidence agent, and a statistical evaluation kit."""

__version__ = "0.1.0"
