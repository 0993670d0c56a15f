# GHZ to W conversion toolkit package initialization