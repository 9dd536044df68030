"""
📊 Test package for MGIG Lab.

Fast tests run by default. Long Monte Carlo checks (50k-iteration chains,
replicated model studies) run only with MGIG_LAB_SLOW=1.
"""
