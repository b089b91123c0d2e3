"""Fast, deterministic tests of every rydsim module."""
