"""Matrix-monotonic precoder design for MIMO links and relay chains."""
