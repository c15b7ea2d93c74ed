"""Library version harmonization for Maven multi-module projects.

Detects version inconsistencies (IC) and false consistencies (FC) across
the modules of a Maven project, computes API-level harmonization efforts
against candidate library versions, and rewrites POM files so a group of
dependencies references a single shared version property.
"""

__version__ = "0.1.0"
