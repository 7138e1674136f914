"""Tests for workers package."""
