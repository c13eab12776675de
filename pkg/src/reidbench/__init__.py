"""Benchmark generator and evaluation harness for text anonymization.

The package builds synthetic, demographically grounded scenario texts
seeded with personal attributes, runs anonymization tools over them,
then attacks the outputs with a model adversary and scores population
re-identification risk against text utility.
"""
from .attributes import ALL_ATTRIBUTES, DIRECT_ATTRIBUTES, INDIRECT_ATTRIBUTES, display_name
from .client import ClientConfig, LLMClient, load_bundle
from .config import RunConfig, load_run_config
from .metrics import bleu, r_succ, reid_risk, rouge, threshold_sweep
from .pipeline import PipelineRun, plan_entries
from .population import PopulationIndex, load_population, sample_target
from .textgen import BenchmarkEntry, GenerationSpec, generate_entry, validate_transcript

__version__ = "0.1.0"

__all__ = [
    "ALL_ATTRIBUTES",
    "BenchmarkEntry",
    "ClientConfig",
    "DIRECT_ATTRIBUTES",
    "GenerationSpec",
    "INDIRECT_ATTRIBUTES",
    "LLMClient",
    "PipelineRun",
    "PopulationIndex",
    "RunConfig",
    "bleu",
    "display_name",
    "generate_entry",
    "load_bundle",
    "load_population",
    "load_run_config",
    "plan_entries",
    "r_succ",
    "reid_risk",
    "rouge",
    "sample_target",
    "threshold_sweep",
    "validate_transcript",
]
