# Source modules for the sketch-and-solve toolkit
