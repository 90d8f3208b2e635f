"""Package data: the default constants file."""
