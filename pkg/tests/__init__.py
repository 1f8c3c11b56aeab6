"""Tests for neural-matter-kit."""
