"""Services package: file formats, run orchestration and derived metrics.

Modules:
 - config_manager.py: `key = value` config files, environment overlay, merging
 - export.py: JSON reports, CSV tables, operator dumps, density files
 - field_check.py: off-surface jump and reproducing-formula checks
 - metrics.py: Pure deviation and convergence calculations
 - runner.py: One handler per CLI command, exit codes
"""
