"""Common service layer Package."""
