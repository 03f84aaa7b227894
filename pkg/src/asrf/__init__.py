"""asrf: multi-model ASR transcript evaluation and error forensics for German."""

__version__ = "0.1.0"
