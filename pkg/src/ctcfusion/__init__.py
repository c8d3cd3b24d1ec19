"""Post-acoustic ASR toolkit: text/alphabet prep, n-gram LM, CTC decoding, WER."""

__version__ = "0.1.0"
