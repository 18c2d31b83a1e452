"""Tests for Wikipedia Citation & Cleanup Tool."""
