"""Configuration, test-state corpus, reports and the command-line driver."""
