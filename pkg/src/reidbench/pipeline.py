"""Run orchestration.

Seven stages: sample -> synth -> generate -> anonymize -> attack ->
score -> report. Each stage writes one JSONL artifact per concern under
<output_dir>/artifacts whose first line records the run fingerprint;
stages refuse inputs stamped with a different fingerprint and resume by
skipping rows that already exist, so a completed stage reruns without a
single model call. Entries that exhaust their retry budget land in
quarantine.jsonl and fail the stage after the survivors are written.

Determinism: every entry owns a seed substream derived from
(run seed, entry index, stage, tool); worker count and output location
never influence artifact content.
"""
from __future__ import annotations

import dataclasses
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import anonymizers
from .attack import AttackParseError, attack_text
from .attributes import canonical_order
from .client import ClientConfig, LLMClient, load_bundle
from .config import DIRECT_KINDS, RunConfig
from .identifiers import (
    DEFAULT_EMAIL_DOMAINS,
    GeoResources,
    NameTables,
    gen_address,
    gen_credit_card,
    gen_email,
    gen_name,
    gen_phone,
    gen_ssn,
    load_area_codes,
)
from .matching import load_match_rules
from .metrics import aggregate_recall, bleu, r_succ, recall_flags, reid_risk, rouge, threshold_sweep
from .population import load_population, sample_target
from .resources import data_path
from .textgen import GenerationSpec, TranscriptFormatError, generate_entry, load_example_bank, render_profile

log = logging.getLogger(__name__)

STAGES = ("sample", "synth", "generate", "anonymize", "attack", "score", "report")
BASELINE_TOOL = "none"

# substream tags keep per-entry generators independent across stages
_STREAM = {"sample": 0, "synth": 1, "generate": 2, "anonymize": 3}


class PipelineError(RuntimeError):
    pass


@dataclass(frozen=True)
class EntryPlan:
    entry_index: int
    entry_id: str
    scenario: str
    level: int
    language: str


def plan_entries(config: RunConfig) -> list[EntryPlan]:
    """Expand the run matrix into the deterministic entry list."""
    plans = []
    idx = 0
    for scenario in config.matrix.scenarios:
        for level in config.matrix.levels:
            for language in config.matrix.languages:
                for _ in range(config.matrix.entries_per_cell):
                    plans.append(
                        EntryPlan(
                            entry_index=idx,
                            entry_id=f"e{idx:04d}-{scenario}-l{level}-{language}",
                            scenario=scenario,
                            level=level,
                            language=language,
                        )
                    )
                    idx += 1
    return plans


def _entry_rng(seed: int, entry_index: int, stage: str, tool_ordinal: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, entry_index, _STREAM[stage], tool_ordinal]))


class PipelineRun:
    """Shared state for one run: config, fingerprint, lazy resources."""

    def __init__(self, config: RunConfig, clients: dict[str, object] | None = None):
        self.config = config
        self.fingerprint = config.fingerprint()
        self.plans = plan_entries(config)
        self._clients: dict[str, object] = dict(clients or {})
        self._bundle_cache: dict[str, str] | None = None
        self._index = None
        self._rules = None
        self._bank = None
        self._names = None
        self._geo = None
        self._area_codes = None

    # -- lazy resources --------------------------------------------------

    @property
    def index(self):
        if self._index is None:
            self._index = load_population(
                self.config.population_csv,
                self.config.codebook_csv,
                self.config.schema,
                seed=self.config.seed,
            )
        return self._index

    @property
    def match_rules(self):
        if self._rules is None:
            path = self.config.match_rules_csv or data_path("match_rules.csv")
            self._rules = load_match_rules(path)
        return self._rules

    @property
    def example_bank(self):
        if self._bank is None:
            self._bank = load_example_bank()
        return self._bank

    def client(self, role: str):
        if role not in self._clients:
            raw = self.config.client_config(role)
            if self.config.replay_bundle is not None:
                if self._bundle_cache is None:
                    self._bundle_cache = load_bundle(self.config.replay_bundle)
                cfg = ClientConfig(
                    backend="replay",
                    model=str(raw.get("model", "")),
                    temperature=float(raw.get("temperature", 0.0)),
                )
                self._clients[role] = LLMClient(cfg, bundle=self._bundle_cache)
            else:
                if not raw:
                    raise PipelineError(
                        f"no client configured for role {role!r} and no replay bundle given"
                    )
                known = {f.name for f in dataclasses.fields(ClientConfig)}
                extra = set(raw) - known
                if extra:
                    raise PipelineError(f"unknown client settings for role {role!r}: {sorted(extra)}")
                cfg = dict(raw)
                cfg.setdefault("cache_dir", str(self.config.output_dir / "cache" / role))
                self._clients[role] = LLMClient(ClientConfig(**cfg))
        return self._clients[role]

    # -- artifact plumbing -----------------------------------------------

    def artifact_path(self, name: str) -> Path:
        return self.config.output_dir / "artifacts" / name

    def report_path(self, name: str) -> Path:
        return self.config.output_dir / "reports" / name

    def _read_artifact(self, name: str, *, required_by: str | None = None) -> list[dict]:
        path = self.artifact_path(name)
        if not path.exists():
            if required_by is None:
                return []
            raise PipelineError(
                f"stage {required_by!r} needs {path}; run its producing stage first"
            )
        rows = []
        with open(path, encoding="utf-8") as fh:
            first = fh.readline()
            try:
                meta = json.loads(first)
            except json.JSONDecodeError as exc:
                raise PipelineError(f"{path}: unreadable artifact header: {exc}") from exc
            if meta.get("fingerprint") != self.fingerprint:
                raise PipelineError(
                    f"{path} carries fingerprint {meta.get('fingerprint', '?')[:12]}... "
                    f"but this run is {self.fingerprint[:12]}...; "
                    "clean the output directory or restore the original config"
                )
            for lineno, line in enumerate(fh, start=2):
                line = line.strip()
                if not line:
                    continue
                try:
                    rows.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise PipelineError(f"{path}:{lineno}: corrupt artifact row: {exc}") from exc
        return rows

    def _append_rows(self, name: str, rows: list[dict]) -> None:
        path = self.artifact_path(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        fresh = not path.exists()
        with open(path, "a", encoding="utf-8") as fh:
            if fresh:
                fh.write(json.dumps({"kind": name, "fingerprint": self.fingerprint}, sort_keys=True) + "\n")
            for row in rows:
                fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")
            fh.flush()

    def _ledger(self, stage: str, rows: int) -> None:
        path = self.config.output_dir / "ledger.jsonl"
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(
                json.dumps(
                    {
                        "stage": stage,
                        "fingerprint": self.fingerprint,
                        "rows": rows,
                        "at": time.strftime("%Y-%m-%dT%H:%M:%S"),
                    },
                    sort_keys=True,
                )
                + "\n"
            )

    def _quarantine(self, failures: list[dict]) -> None:
        path = self.config.output_dir / "quarantine.jsonl"
        with open(path, "a", encoding="utf-8") as fh:
            for failure in failures:
                fh.write(json.dumps(failure, ensure_ascii=False, sort_keys=True) + "\n")

    def _map(self, fn, items):
        """Run fn over items, preserving order; threads only when asked."""
        if self.config.workers > 1 and len(items) > 1:
            with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
                return list(pool.map(fn, items))
        return [fn(item) for item in items]

    def _pending(self, plans, done: set) -> list[EntryPlan]:
        return [p for p in plans if p.entry_id not in done]

    def _by_entry(self, rows: list[dict], name: str, *, complete: bool = False) -> dict[str, dict]:
        table = {row["entry_id"]: row for row in rows}
        if complete:
            missing = [p.entry_id for p in self.plans if p.entry_id not in table]
            if missing:
                raise PipelineError(
                    f"{name} is missing {len(missing)} entries (first: {missing[0]}); "
                    "rerun its producing stage"
                )
        return table

    # -- stages ----------------------------------------------------------

    def stage_sample(self) -> None:
        done = {row["entry_id"] for row in self._read_artifact("targets.jsonl")}
        pending = self._pending(self.plans, done)
        if not pending:
            self._ledger("sample", 0)
            return
        spec = self.config.sampling
        batch_subsets: dict[tuple, tuple[str, ...]] = {}
        if spec.subset_policy == "per_batch":
            cells = sorted({(p.scenario, p.level, p.language) for p in self.plans})
            for ordinal, cell in enumerate(cells):
                rng = np.random.default_rng(np.random.SeedSequence([self.config.seed, 10_000 + ordinal]))
                _, subset = sample_target(self.index, spec, rng)
                batch_subsets[cell] = subset

        rows = []
        for plan in pending:
            rng = _entry_rng(self.config.seed, plan.entry_index, "sample")
            subset = batch_subsets.get((plan.scenario, plan.level, plan.language))
            record, subset = sample_target(self.index, spec, rng, subset=subset)
            if plan.level == 3 or self.config.matrix.n_direct == 0:
                direct_kinds: tuple[str, ...] = ()
            else:
                picked = rng.choice(len(DIRECT_KINDS), size=self.config.matrix.n_direct, replace=False)
                direct_kinds = tuple(DIRECT_KINDS[i] for i in sorted(picked))
            rows.append(
                {
                    "entry_id": plan.entry_id,
                    "entry_index": plan.entry_index,
                    "scenario": plan.scenario,
                    "level": plan.level,
                    "language": plan.language,
                    "record_id": record.record_id,
                    "subset": list(subset),
                    "direct_kinds": list(direct_kinds),
                    "values": dict(record.values),
                    "puma": record.puma,
                    "age": record.age,
                }
            )
        self._append_rows("targets.jsonl", rows)
        self._ledger("sample", len(rows))

    def stage_synth(self) -> None:
        targets = self._by_entry(
            self._read_artifact("targets.jsonl", required_by="synth"), "targets.jsonl", complete=True
        )
        done = {row["entry_id"] for row in self._read_artifact("identifiers.jsonl")}
        pending = self._pending(self.plans, done)
        if not pending:
            self._ledger("synth", 0)
            return
        domains = self.config.email_domains or DEFAULT_EMAIL_DOMAINS

        def synth_one(plan: EntryPlan) -> dict:
            target = targets[plan.entry_id]
            rng = _entry_rng(self.config.seed, plan.entry_index, "synth")
            direct: dict[str, str] = {}
            for kind in target["direct_kinds"]:
                if kind == "name":
                    birth_year = self.config.schema.reference_year - int(target["age"])
                    sex = target["values"]["sex"].strip()[:1].upper()
                    direct[kind] = gen_name(rng, birth_year, sex, self._name_tables())
                elif kind == "ssn":
                    direct[kind] = gen_ssn(rng)
                elif kind == "credit_card":
                    direct[kind] = gen_credit_card(rng)
                elif kind == "phone":
                    direct[kind] = gen_phone(rng, target["values"]["state"], self._area_code_table())
                elif kind == "address":
                    direct[kind] = gen_address(rng, target["puma"], self._geo_resources())
                elif kind == "email":
                    profile = dict(self._indirect_truth(target))
                    if "name" in direct:
                        profile["name"] = direct["name"]
                    direct[kind] = gen_email(
                        self.client("synth"),
                        render_profile(profile),
                        allowed_domains=domains,
                        max_attempts=self.config.max_generation_attempts,
                    )
                else:
                    raise PipelineError(f"unknown direct identifier kind {kind!r}")
            return {"entry_id": plan.entry_id, "direct": direct}

        rows = self._map(synth_one, pending)
        self._append_rows("identifiers.jsonl", rows)
        self._ledger("synth", len(rows))

    def _indirect_truth(self, target: dict) -> dict[str, str]:
        return {a: target["values"][a] for a in target["subset"]}

    def _ground_truth(self, target: dict, identifiers: dict) -> dict[str, str]:
        truth = self._indirect_truth(target)
        truth.update(identifiers["direct"])
        return truth

    def _target_attrs(self, target: dict) -> tuple[str, ...]:
        return tuple(canonical_order(list(target["subset"]) + list(target["direct_kinds"])))

    def stage_generate(self) -> None:
        targets = self._by_entry(
            self._read_artifact("targets.jsonl", required_by="generate"), "targets.jsonl", complete=True
        )
        ids = self._by_entry(
            self._read_artifact("identifiers.jsonl", required_by="generate"),
            "identifiers.jsonl",
            complete=True,
        )
        done = {row["entry_id"] for row in self._read_artifact("entries.jsonl")}
        pending = self._pending(self.plans, done)
        if not pending:
            self._ledger("generate", 0)
            return

        failures: list[dict] = []

        def generate_one(plan: EntryPlan) -> dict | None:
            target = targets[plan.entry_id]
            truth = self._ground_truth(target, ids[plan.entry_id])
            spec = GenerationSpec(
                scenario=plan.scenario,
                level=plan.level,
                language=plan.language,
                target_attrs=self._target_attrs(target),
            )
            rng = _entry_rng(self.config.seed, plan.entry_index, "generate")
            try:
                entry = generate_entry(
                    self.client("generate"),
                    plan.entry_id,
                    truth,
                    truth,
                    spec,
                    self.example_bank,
                    rng,
                    profile_ref=target["record_id"],
                    seed=self.config.seed,
                    max_attempts=self.config.max_generation_attempts,
                )
            except TranscriptFormatError as exc:
                failures.append({"stage": "generate", "entry_id": plan.entry_id, "error": str(exc)})
                return None
            return {
                "entry_id": entry.entry_id,
                "scenario": entry.scenario,
                "level": entry.level,
                "language": entry.language,
                "target_attrs": list(entry.target_attrs),
                "ground_truth": entry.ground_truth,
                "text": entry.text,
                "profile_ref": entry.profile_ref,
            }

        rows = [row for row in self._map(generate_one, pending) if row is not None]
        self._append_rows("entries.jsonl", rows)
        if failures:
            self._quarantine(failures)
            self._ledger("generate", len(rows))
            raise PipelineError(
                f"{len(failures)} entries failed generation and were quarantined "
                f"(see {self.config.output_dir / 'quarantine.jsonl'})"
            )
        self._ledger("generate", len(rows))

    def stage_anonymize(self) -> None:
        entries = self._by_entry(
            self._read_artifact("entries.jsonl", required_by="anonymize"), "entries.jsonl", complete=True
        )
        needs_client = {"llm_redact", "llm_summary", "llm_entities"}
        total = 0
        for tool_ordinal, tool in enumerate(self.config.tools):
            artifact = f"anon_{tool.tool_id}.jsonl"
            done = {row["entry_id"] for row in self._read_artifact(artifact)}
            pending = self._pending(self.plans, done)
            if not pending:
                continue
            client = self.client("anonymize") if tool.type in needs_client else None
            run_tool = anonymizers.build_tool(
                {"id": tool.tool_id, "type": tool.type, **tool.params}, client
            )

            def anonymize_one(plan: EntryPlan, tool_id=tool.tool_id, run=run_tool, ordinal=tool_ordinal, cl=client):
                entry = entries[plan.entry_id]
                rng = _entry_rng(self.config.seed, plan.entry_index, "anonymize", ordinal)
                before = cl.thread_usage() if cl is not None else (0, 0)
                started = time.perf_counter()
                text = run(
                    entry["text"],
                    scenario=plan.scenario,
                    language=plan.language,
                    rng=rng,
                )
                elapsed = time.perf_counter() - started
                after = cl.thread_usage() if cl is not None else (0, 0)
                return {
                    "entry_id": plan.entry_id,
                    "tool_id": tool_id,
                    "text": text,
                    "fingerprint": self.fingerprint,
                    "latency_s": elapsed,
                    "prompt_tokens": after[0] - before[0],
                    "completion_tokens": after[1] - before[1],
                }

            rows = self._map(anonymize_one, pending)
            self._append_rows(artifact, rows)
            total += len(rows)
        self._ledger("anonymize", total)

    def _attack_tool_ids(self) -> list[str]:
        return [BASELINE_TOOL] + [tool.tool_id for tool in self.config.tools]

    def stage_attack(self) -> None:
        entries = self._by_entry(
            self._read_artifact("entries.jsonl", required_by="attack"), "entries.jsonl", complete=True
        )
        failures: list[dict] = []
        total = 0
        for tool_id in self._attack_tool_ids():
            if tool_id == BASELINE_TOOL:
                texts = {eid: row["text"] for eid, row in entries.items()}
            else:
                anon = self._by_entry(
                    self._read_artifact(f"anon_{tool_id}.jsonl", required_by="attack"),
                    f"anon_{tool_id}.jsonl",
                    complete=True,
                )
                texts = {eid: row["text"] for eid, row in anon.items()}
            artifact = f"attack_{tool_id}.jsonl"
            done = {row["entry_id"] for row in self._read_artifact(artifact)}
            pending = self._pending(self.plans, done)
            if not pending:
                continue

            def attack_one(plan: EntryPlan, tool_id=tool_id, texts=texts):
                entry = entries[plan.entry_id]
                try:
                    report = attack_text(
                        self.client("attack"),
                        plan.entry_id,
                        tool_id,
                        texts[plan.entry_id],
                        tuple(entry["target_attrs"]),
                        entry["ground_truth"],
                        self.match_rules,
                        self.index,
                        language=plan.language,
                        max_attempts=self.config.max_generation_attempts,
                    )
                except AttackParseError as exc:
                    failures.append(
                        {"stage": "attack", "entry_id": plan.entry_id, "tool_id": tool_id, "error": str(exc)}
                    )
                    return None
                return {
                    "entry_id": report.entry_id,
                    "tool_id": report.tool_id,
                    "guesses": {
                        attribute: {
                            "inference": guess.inference,
                            "guess": guess.guess,
                            "certainty": guess.certainty,
                        }
                        for attribute, guess in report.guesses.items()
                    },
                    "verdicts": report.verdicts,
                    "inferred": report.inferred,
                }

            rows = [row for row in self._map(attack_one, pending) if row is not None]
            self._append_rows(artifact, rows)
            total += len(rows)
        if failures:
            self._quarantine(failures)
            self._ledger("attack", total)
            raise PipelineError(
                f"{len(failures)} attacks failed parsing and were quarantined "
                f"(see {self.config.output_dir / 'quarantine.jsonl'})"
            )
        self._ledger("attack", total)

    def stage_score(self) -> None:
        entries = self._by_entry(
            self._read_artifact("entries.jsonl", required_by="score"), "entries.jsonl", complete=True
        )
        done = {(row["entry_id"], row["tool_id"]) for row in self._read_artifact("scores.jsonl")}
        rows = []
        for tool_id in self._attack_tool_ids():
            attacks = self._by_entry(
                self._read_artifact(f"attack_{tool_id}.jsonl", required_by="score"),
                f"attack_{tool_id}.jsonl",
                complete=True,
            )
            if tool_id == BASELINE_TOOL:
                texts = {eid: row["text"] for eid, row in entries.items()}
            else:
                anon = self._by_entry(
                    self._read_artifact(f"anon_{tool_id}.jsonl", required_by="score"),
                    f"anon_{tool_id}.jsonl",
                    complete=True,
                )
                texts = {eid: row["text"] for eid, row in anon.items()}
            for plan in self.plans:
                if (plan.entry_id, tool_id) in done:
                    continue
                entry = entries[plan.entry_id]
                risk = reid_risk(self.index, attacks[plan.entry_id]["inferred"])
                quality = rouge(texts[plan.entry_id], entry["text"])
                rows.append(
                    {
                        "entry_id": plan.entry_id,
                        "tool_id": tool_id,
                        "scenario": plan.scenario,
                        "level": plan.level,
                        "language": plan.language,
                        "risk": risk,
                        "success": risk >= self.config.risk.theta,
                        "bleu": bleu(texts[plan.entry_id], entry["text"]),
                        "rouge1": quality["rouge1"],
                        "rouge2": quality["rouge2"],
                        "rougeL": quality["rougeL"],
                    }
                )
        self._append_rows("scores.jsonl", rows)
        self._ledger("score", len(rows))

    def stage_report(self) -> None:
        scores = self._read_artifact("scores.jsonl", required_by="report")
        expected = {(p.entry_id, t) for p in self.plans for t in self._attack_tool_ids()}
        have = {(row["entry_id"], row["tool_id"]) for row in scores}
        missing = sorted(expected - have)
        if missing:
            raise PipelineError(
                f"scores.jsonl is missing {len(missing)} rows (first: {missing[0]}); rerun 'score'"
            )
        report_dir = self.config.output_dir / "reports"
        report_dir.mkdir(parents=True, exist_ok=True)
        tool_order = self._attack_tool_ids()

        def by_tool(tool_id):
            return [row for row in scores if row["tool_id"] == tool_id]

        def write_csv(name: str, header: list[str], rows: list[list]) -> None:
            lines = [",".join(header)]
            for row in rows:
                cells = []
                for value in row:
                    cells.append(f"{value:.6f}" if isinstance(value, float) else str(value))
                lines.append(",".join(cells))
            (report_dir / name).write_text("\n".join(lines) + "\n", encoding="utf-8")

        rows = []
        for tool_id in tool_order:
            for level in self.config.matrix.levels:
                risks = [row["risk"] for row in by_tool(tool_id) if row["level"] == level]
                rows.append([tool_id, level, len(risks), r_succ(risks, self.config.risk.theta)])
        write_csv("rsucc_by_level.csv", ["tool_id", "level", "n", "rsucc"], rows)

        rows = []
        for tool_id in tool_order:
            for scenario in self.config.matrix.scenarios:
                risks = [row["risk"] for row in by_tool(tool_id) if row["scenario"] == scenario]
                rows.append([tool_id, scenario, len(risks), r_succ(risks, self.config.risk.theta)])
        write_csv("rsucc_by_scenario.csv", ["tool_id", "scenario", "n", "rsucc"], rows)

        rows = []
        for tool_id in tool_order:
            risks = [row["risk"] for row in by_tool(tool_id)]
            for theta, value in threshold_sweep(risks, self.config.risk.sweep):
                rows.append([tool_id, theta, value])
        write_csv("theta_sweep.csv", ["tool_id", "theta", "rsucc"], rows)

        baseline = {
            row["entry_id"]: row["verdicts"]
            for row in self._read_artifact(f"attack_{BASELINE_TOOL}.jsonl", required_by="report")
        }
        direct_rows, indirect_rows = [], []
        for tool in self.config.tools:
            attacks = self._read_artifact(f"attack_{tool.tool_id}.jsonl", required_by="report")
            flags = [
                recall_flags(baseline[row["entry_id"]], row["verdicts"])
                for row in attacks
                if row["entry_id"] in baseline
            ]
            totals = aggregate_recall(flags)
            for attribute in sorted(totals):
                recalled, denom = totals[attribute]
                pct = 100.0 * recalled / denom if denom else 0.0
                bucket = direct_rows if attribute in DIRECT_KINDS else indirect_rows
                bucket.append([tool.tool_id, attribute, recalled, denom, pct])
        header = ["tool_id", "attribute", "recalled", "denominator", "recall_pct"]
        write_csv("recall_direct.csv", header, direct_rows)
        write_csv("recall_indirect.csv", header, indirect_rows)

        rows = []
        for tool_id in tool_order:
            subset = by_tool(tool_id)
            n = len(subset)

            def mean(key):
                return sum(row[key] for row in subset) / n if n else 0.0

            rows.append(
                [
                    tool_id,
                    n,
                    r_succ([row["risk"] for row in subset], self.config.risk.theta),
                    mean("risk"),
                    mean("bleu"),
                    mean("rouge1"),
                    mean("rouge2"),
                    mean("rougeL"),
                ]
            )
        write_csv(
            "utility.csv",
            ["tool_id", "n", "rsucc", "mean_risk", "mean_bleu", "mean_rouge1", "mean_rouge2", "mean_rougeL"],
            rows,
        )
        self._ledger("report", len(scores))

    # -- entry point -----------------------------------------------------

    def run(self, stages=STAGES) -> None:
        known = set(STAGES)
        for stage in stages:
            if stage not in known:
                raise PipelineError(f"unknown stage {stage!r}")
        for stage in STAGES:
            if stage in stages:
                log.info("stage %s starting", stage)
                getattr(self, f"stage_{stage}")()
                log.info("stage %s done", stage)

    # -- resource helpers -------------------------------------------------

    def _name_tables(self) -> NameTables:
        if self._names is None:
            self._names = NameTables(self.config.names_dir, self.config.surnames_csv)
        return self._names

    def _geo_resources(self) -> GeoResources:
        if self._geo is None:
            self._geo = GeoResources(self.config.crosswalk_csv, self.config.venues_csv)
        return self._geo

    def _area_code_table(self) -> dict[str, list[int]]:
        if self._area_codes is None:
            self._area_codes = load_area_codes(self.config.area_codes_csv)
        return self._area_codes
