"""Root package for the Dirac delta-shell boundary-integral toolkit."""
