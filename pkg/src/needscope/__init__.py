"""Financial-needs mining pipeline: corpus filtering, age/income attribution,
pluggable need extraction, LDA topic selection, and report tables."""

__version__ = "0.1.0"
