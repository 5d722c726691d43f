"""surftreat: desk-scale surface-treatment pipeline.

Scan ingestion and defect detection, meander tool-path planning over scanned
surfaces, hybrid force-position control against a simulated compliant
contact, and an interactive knowledge-driven wizard tying it together.
"""

__version__ = "0.1.0"
