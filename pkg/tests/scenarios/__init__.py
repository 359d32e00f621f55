"""Named states and elements shared by the test modules."""
