"""Radiomics pipeline for peri-pancreatic edema classification from CT."""

__version__ = "0.1.0"
