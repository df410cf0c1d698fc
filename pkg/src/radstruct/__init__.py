"""radstruct: protocol-driven structuring of free-text radiology reports.

An agent loop plans tool calls against a small tool server (concept
extraction, ontology mapping and filtering, protocol categorization,
report generation, concept cache), producing section-ordered structured
reports with a complete audit trace.  The ``evaluation`` subpackage holds
the matching metrics harness.
"""

__version__ = "0.1.0"

from radstruct.protocol import (
    CategorizedConcept,
    MedicalConcept,
    ProtocolCategory,
    ProtocolSchema,
    StructuredReport,
    load_default_schema,
)

__all__ = [
    "CategorizedConcept",
    "MedicalConcept",
    "ProtocolCategory",
    "ProtocolSchema",
    "StructuredReport",
    "load_default_schema",
    "__version__",
]
