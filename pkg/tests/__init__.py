"""Test package for transversality."""
