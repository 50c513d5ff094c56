"""Tools - scenario configuration and run artifacts."""
