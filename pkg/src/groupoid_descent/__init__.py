"""Finite descent for set-valued functors on groupoids."""
