"""This sub-package contains integration tests to test components of your package in combination."""
