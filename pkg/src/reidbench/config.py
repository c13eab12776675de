"""Run configuration.

A run is described by one YAML file. Relative paths inside it resolve
against the file's own directory, so a config travels with its data.
Every run carries a fingerprint: a digest of the semantic settings plus
the content of every input data file. Artifacts stamp the fingerprint
and downstream stages refuse inputs from a different one. Operational
knobs (worker count, output directory, cache locations, endpoint
credentials, replay bundle path) stay out of the fingerprint because
they cannot change what a run should produce.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from .attributes import INDIRECT_ATTRIBUTES
from .population import DEFAULT_COLUMNS, PopulationSchema, SamplingSpec
from .textgen import LANGUAGE_NAMES, SCENARIOS, WORD_RANGES

DIRECT_KINDS = ("name", "ssn", "credit_card", "phone", "address", "email")

# client-config keys that change responses, and therefore the fingerprint
_SEMANTIC_CLIENT_KEYS = ("model", "temperature", "seed")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ToolConfig:
    tool_id: str
    type: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class MatrixConfig:
    scenarios: tuple[str, ...] = tuple(sorted(SCENARIOS))
    levels: tuple[int, ...] = (1, 2, 3)
    languages: tuple[str, ...] = ("en",)
    entries_per_cell: int = 1
    n_direct: int = 2

    def __post_init__(self):
        for scenario in self.scenarios:
            if scenario not in SCENARIOS:
                raise ConfigError(f"unknown scenario {scenario!r}")
        for level in self.levels:
            if level not in WORD_RANGES:
                raise ConfigError(f"unknown difficulty level {level!r}")
        for language in self.languages:
            if language not in LANGUAGE_NAMES:
                raise ConfigError(f"unsupported language {language!r}")
        if self.entries_per_cell < 1:
            raise ConfigError("entries_per_cell must be at least 1")
        if not 0 <= self.n_direct <= len(DIRECT_KINDS):
            raise ConfigError(f"n_direct must be in [0, {len(DIRECT_KINDS)}]")


@dataclass(frozen=True)
class RiskConfig:
    theta: float = 0.5
    sweep: tuple[float, ...] = tuple(round(0.1 * i, 1) for i in range(1, 11))

    def __post_init__(self):
        if not 0 < self.theta <= 1:
            raise ConfigError("theta must be in (0, 1]")
        if any(not 0 < t <= 1 for t in self.sweep):
            raise ConfigError("sweep thresholds must be in (0, 1]")


@dataclass(frozen=True)
class RunConfig:
    seed: int
    output_dir: Path
    population_csv: Path
    codebook_csv: Path
    names_dir: Path
    surnames_csv: Path
    area_codes_csv: Path
    crosswalk_csv: Path
    venues_csv: Path
    schema: PopulationSchema = PopulationSchema()
    sampling: SamplingSpec = SamplingSpec()
    matrix: MatrixConfig = MatrixConfig()
    risk: RiskConfig = RiskConfig()
    match_rules_csv: Path | None = None  # None -> packaged defaults
    email_domains: tuple[str, ...] = ()
    max_generation_attempts: int = 3
    workers: int = 1
    clients: dict = field(default_factory=dict)
    tools: tuple[ToolConfig, ...] = ()
    replay_bundle: Path | None = None

    def client_config(self, role: str) -> dict:
        """Per-role client settings; `default` fills unset roles."""
        merged = dict(self.clients.get("default", {}))
        merged.update(self.clients.get(role, {}))
        return merged

    def data_files(self) -> list[Path]:
        files = [
            self.population_csv,
            self.codebook_csv,
            self.surnames_csv,
            self.area_codes_csv,
            self.crosswalk_csv,
            self.venues_csv,
        ]
        files.extend(sorted(self.names_dir.glob("yob*.csv")))
        if self.match_rules_csv is not None:
            files.append(self.match_rules_csv)
        for tool in self.tools:
            for key in ("rules", "embeddings"):
                if key in tool.params:
                    files.append(Path(tool.params[key]))
        return files

    def fingerprint(self) -> str:
        payload = {
            "seed": self.seed,
            "schema": {
                "columns": self.schema.columns,
                "age_column": self.schema.age_column,
                "puma_column": self.schema.puma_column,
                "record_id_column": self.schema.record_id_column,
                "reference_year": self.schema.reference_year,
            },
            "sampling": {
                "n_indirect": self.sampling.n_indirect,
                "subset_policy": self.sampling.subset_policy,
            },
            "matrix": {
                "scenarios": self.matrix.scenarios,
                "levels": self.matrix.levels,
                "languages": self.matrix.languages,
                "entries_per_cell": self.matrix.entries_per_cell,
                "n_direct": self.matrix.n_direct,
            },
            "risk": {"theta": self.risk.theta, "sweep": self.risk.sweep},
            "email_domains": self.email_domains,
            "max_generation_attempts": self.max_generation_attempts,
            "clients": {
                role: {k: cfg.get(k) for k in _SEMANTIC_CLIENT_KEYS}
                for role, cfg in sorted(self.clients.items())
            },
            "tools": [
                {
                    "tool_id": tool.tool_id,
                    "type": tool.type,
                    "params": {
                        k: v for k, v in sorted(tool.params.items()) if k not in ("rules", "embeddings")
                    },
                }
                for tool in self.tools
            ],
        }
        digest = hashlib.sha256(json.dumps(payload, sort_keys=True, default=str).encode("utf-8"))
        for path in self.data_files():
            digest.update(path.name.encode("utf-8"))
            digest.update(path.read_bytes())
        return digest.hexdigest()


def _require(raw: dict, key: str, where: str):
    if key not in raw:
        raise ConfigError(f"missing required key {key!r} in {where}")
    return raw[key]


def _path(base: Path, value) -> Path:
    p = Path(str(value))
    return p if p.is_absolute() else base / p


def load_run_config(path: str | Path) -> RunConfig:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    base = path.parent

    pop = _require(raw, "population", str(path))
    res = _require(raw, "resources", str(path))

    schema_raw = pop.get("schema", {})
    columns = schema_raw.get("columns", DEFAULT_COLUMNS)
    if set(columns) != set(INDIRECT_ATTRIBUTES) - {"date_of_birth"}:
        raise ConfigError("population schema must map every coded attribute to a column")
    schema = PopulationSchema(
        columns={k: str(v) for k, v in columns.items()},
        age_column=schema_raw.get("age_column", "AGE"),
        puma_column=schema_raw.get("puma_column", "PUMA"),
        record_id_column=schema_raw.get("record_id_column"),
        reference_year=int(schema_raw.get("reference_year", 2025)),
    )

    sampling_raw = raw.get("sampling", {})
    sampling = SamplingSpec(
        n_indirect=int(sampling_raw.get("n_indirect", 5)),
        subset_policy=sampling_raw.get("subset_policy", "per_entry"),
    )

    matrix_raw = raw.get("matrix", {})
    matrix = MatrixConfig(
        scenarios=tuple(matrix_raw.get("scenarios", sorted(SCENARIOS))),
        levels=tuple(int(x) for x in matrix_raw.get("levels", (1, 2, 3))),
        languages=tuple(matrix_raw.get("languages", ("en",))),
        entries_per_cell=int(matrix_raw.get("entries_per_cell", 1)),
        n_direct=int(matrix_raw.get("n_direct", 2)),
    )

    risk_raw = raw.get("risk", {})
    risk = RiskConfig(
        theta=float(risk_raw.get("theta", 0.5)),
        sweep=tuple(float(t) for t in risk_raw.get("sweep", [round(0.1 * i, 1) for i in range(1, 11)])),
    )

    tools = []
    seen_ids = set()
    for i, tool_raw in enumerate(raw.get("tools", [])):
        tool_id = _require(tool_raw, "id", f"tools[{i}]")
        tool_type = _require(tool_raw, "type", f"tools[{i}]")
        if tool_id in seen_ids:
            raise ConfigError(f"duplicate tool id {tool_id!r}")
        seen_ids.add(tool_id)
        params = {k: v for k, v in tool_raw.items() if k not in ("id", "type")}
        for key in ("rules", "embeddings"):
            if key in params:
                params[key] = str(_path(base, params[key]))
        tools.append(ToolConfig(tool_id=str(tool_id), type=str(tool_type), params=params))

    clients = raw.get("clients", {})
    if not isinstance(clients, dict):
        raise ConfigError("clients must map role names to client settings")

    match_rules = raw.get("match_rules")
    return RunConfig(
        seed=int(_require(raw, "seed", str(path))),
        output_dir=_path(base, raw.get("output_dir", "runs")),
        population_csv=_path(base, _require(pop, "csv", "population")),
        codebook_csv=_path(base, _require(pop, "codebook", "population")),
        names_dir=_path(base, _require(res, "names_dir", "resources")),
        surnames_csv=_path(base, _require(res, "surnames", "resources")),
        area_codes_csv=_path(base, _require(res, "area_codes", "resources")),
        crosswalk_csv=_path(base, _require(res, "crosswalk", "resources")),
        venues_csv=_path(base, _require(res, "venues", "resources")),
        schema=schema,
        sampling=sampling,
        matrix=matrix,
        risk=risk,
        match_rules_csv=_path(base, match_rules) if match_rules else None,
        email_domains=tuple(raw.get("email_domains", ())),
        max_generation_attempts=int(raw.get("max_generation_attempts", 3)),
        workers=int(raw.get("workers", 1)),
        clients=clients,
        tools=tuple(tools),
    )


def apply_overrides(
    config: RunConfig,
    *,
    seed: int | None = None,
    workers: int | None = None,
    output_dir: str | None = None,
    replay_bundle: str | None = None,
    tools: list[str] | None = None,
    levels: list[int] | None = None,
    scenarios: list[str] | None = None,
    languages: list[str] | None = None,
) -> RunConfig:
    """Fold command-line overrides into a loaded config."""
    updates: dict = {}
    if seed is not None:
        updates["seed"] = seed
    if workers is not None:
        updates["workers"] = workers
    if output_dir is not None:
        updates["output_dir"] = Path(output_dir)
    if replay_bundle is not None:
        updates["replay_bundle"] = Path(replay_bundle)
    if tools is not None:
        known = {t.tool_id for t in config.tools}
        missing = [t for t in tools if t not in known]
        if missing:
            raise ConfigError(f"unknown tool ids in --tools: {', '.join(missing)}")
        updates["tools"] = tuple(t for t in config.tools if t.tool_id in tools)
    matrix_updates: dict = {}
    if levels is not None:
        matrix_updates["levels"] = tuple(levels)
    if scenarios is not None:
        matrix_updates["scenarios"] = tuple(scenarios)
    if languages is not None:
        matrix_updates["languages"] = tuple(languages)
    if matrix_updates:
        updates["matrix"] = replace(config.matrix, **matrix_updates)
    return replace(config, **updates) if updates else config
