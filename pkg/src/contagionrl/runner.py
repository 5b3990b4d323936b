"""Batch experiment execution and statistical report generation.

Episodes are independent across (seed, episode) pairs: each derives its
own RNG seed, so serial and parallel execution produce identical rows
(rows are ordered by seed, then episode index, before writing).
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baselines import make_policy
from .config import SimConfig
from .environment import Environment
from .episodes import (CSV_COLUMNS, EpisodeRecord, StepLog, record_to_jsonl,
                       summary_from_row, summary_to_row)
from .render import dump_frames
from .stats import SampleSet, bootstrap_ci, episode_metrics, mann_whitney_u


@dataclass
class ExperimentManifest:
    config: SimConfig
    policy: str
    seeds: list[int]
    episodes_per_seed: int
    out_dir: Path
    trace: bool = False
    render: bool = False
    workers: int = 1

    def __post_init__(self):
        self.out_dir = Path(self.out_dir)
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be distinct")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if self.episodes_per_seed < 1:
            raise ValueError("episodes_per_seed must be >= 1")
        if self.render and self.workers > 1:
            raise ValueError("frame dumping requires workers=1")


def derive_episode_seed(seed: int, episode_idx: int) -> int:
    """Stable per-episode RNG seed from the (seed, episode) pair."""
    return int(np.random.SeedSequence([seed, episode_idx]).generate_state(
        1, np.uint64)[0])


def run_episode(config: SimConfig, policy_name: str, seed: int,
                episode_idx: int, collect_worlds: bool = False):
    """Run one full episode; returns (record, world snapshots or None)."""
    env = Environment(config)
    env.reset(derive_episode_seed(seed, episode_idx))
    policy = make_policy(policy_name, rng=env.policy_rng,
                         movement_scale=config.movement_scale)
    steps: list[StepLog] = []
    worlds = [] if collect_worlds else None
    exhausted = False
    while True:
        try:
            action = policy(env.world)
        except StopIteration:
            exhausted = True
            break
        outcome = env.step(action)
        steps.append(StepLog(
            t=env.world.t,
            reward=outcome.reward,
            action=tuple(float(x) for x in np.asarray(action, dtype=float)[:3]),
            counts=outcome.info["counts"],
            new_infections=outcome.info["new_infections"],
            agent_infected=outcome.info["agent_infected"],
            terminated=outcome.terminated,
            truncated=outcome.truncated,
        ))
        if collect_worlds:
            worlds.append(env.world.copy())
        if outcome.terminated or outcome.truncated:
            break
    record = EpisodeRecord(seed=seed, episode_idx=episode_idx, steps=steps,
                           summary=None)
    record.summary = episode_metrics(record)
    if exhausted:
        # Replay actions ran out before the episode ended on its own.
        record.summary.truncated = True
    return record, worlds


def _run_episode_task(args):
    config, policy_name, seed, episode_idx = args
    record, _ = run_episode(config, policy_name, seed, episode_idx)
    return record


def run_experiment(manifest: ExperimentManifest) -> list[EpisodeRecord]:
    """Execute seeds x episodes and persist per-episode rows.

    Rows that completed are flushed to the episode CSV even if a later
    episode or the writer fails.
    """
    manifest.out_dir.mkdir(parents=True, exist_ok=True)
    tasks = [(manifest.config, manifest.policy, seed, ep)
             for seed in manifest.seeds
             for ep in range(manifest.episodes_per_seed)]

    records: list[EpisodeRecord] = []
    try:
        if manifest.workers > 1:
            with ProcessPoolExecutor(max_workers=manifest.workers) as pool:
                records.extend(pool.map(_run_episode_task, tasks))
        else:
            for task in tasks:
                if manifest.render:
                    record, worlds = run_episode(*task[:4], collect_worlds=True)
                    frame_dir = (manifest.out_dir / "frames" /
                                 f"{policy_file_label(manifest.policy)}"
                                 f"_s{task[2]}_e{task[3]}")
                    dump_frames(worlds, frame_dir)
                else:
                    record = _run_episode_task(task)
                records.append(record)
    finally:
        if records:
            _write_episode_csv(manifest, records)
            if manifest.trace:
                _write_traces(manifest, records)
    return records


def policy_file_label(policy: str) -> str:
    """Filesystem-safe label: replay policies collapse to 'replay'."""
    return "replay" if policy.startswith("replay:") else policy


def episodes_csv_path(out_dir: Path, policy: str) -> Path:
    return Path(out_dir) / f"episodes_{policy_file_label(policy)}.csv"


def _write_episode_csv(manifest: ExperimentManifest,
                       records: list[EpisodeRecord]) -> None:
    ordered = sorted(records, key=lambda r: (r.seed, r.episode_idx))
    lines = [",".join(CSV_COLUMNS)]
    lines.extend(summary_to_row(r.seed, r.episode_idx, r.summary)
                 for r in ordered)
    path = episodes_csv_path(manifest.out_dir, manifest.policy)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_traces(manifest: ExperimentManifest,
                  records: list[EpisodeRecord]) -> None:
    trace_dir = manifest.out_dir / f"trace_{policy_file_label(manifest.policy)}"
    trace_dir.mkdir(parents=True, exist_ok=True)
    for record in records:
        path = trace_dir / f"s{record.seed}_e{record.episode_idx}.jsonl"
        path.write_text(record_to_jsonl(record), encoding="utf-8")


def load_episode_rows(path: Path):
    """Parse one episodes CSV into (seed, episode_idx, summary) tuples."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != ",".join(CSV_COLUMNS):
        raise ValueError(f"{path} is not an episodes CSV")
    return [summary_from_row(line) for line in lines[1:] if line.strip()]


@dataclass
class PolicyAggregate:
    label: str
    durations: SampleSet
    rewards: SampleSet
    infection_rates: SampleSet
    n_episodes: int = field(init=False)

    def __post_init__(self):
        self.n_episodes = len(self.durations.values)


def load_policy_aggregates(in_dir: Path) -> list[PolicyAggregate]:
    """Read every episodes_<policy>.csv under a results directory."""
    in_dir = Path(in_dir)
    aggregates = []
    for path in sorted(in_dir.glob("episodes_*.csv")):
        label = path.stem[len("episodes_"):]
        rows = load_episode_rows(path)
        if not rows:
            continue
        seeds = np.array([seed for seed, _, _ in rows])
        aggregates.append(PolicyAggregate(
            label=label,
            durations=SampleSet(label, np.array([s.duration for _, _, s in rows],
                                                dtype=float), seeds),
            rewards=SampleSet(label, np.array([s.cumulative_reward
                                               for _, _, s in rows]), seeds),
            infection_rates=SampleSet(label, np.array([s.infections_per_step
                                                       for _, _, s in rows]),
                                      seeds),
        ))
    if not aggregates:
        raise ValueError(f"no episodes_*.csv files found under {in_dir}")
    return aggregates


def _sig_code(p: float) -> str:
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return "n.s."


SUMMARY_COLUMNS = ("policy", "episodes", "mean_duration", "duration_ci_lo",
                   "duration_ci_hi", "mean_reward", "reward_ci_lo",
                   "reward_ci_hi", "mean_infections_per_step",
                   "infection_ci_lo", "infection_ci_hi")

PAIRWISE_COLUMNS = ("agent_a", "agent_b", "p_two_sided", "p_one_sided",
                    "sig_two_sided", "p_one_sided_corrected", "sig_one_sided",
                    "winner")


def build_report(aggregates: list[PolicyAggregate], pairs: str = "all",
                 alpha: float = 0.05, n_resamples: int = 10_000,
                 bootstrap_seed: int = 0):
    """Per-policy summaries plus the pairwise Mann-Whitney table.

    Returns (summary_rows, pairwise_rows); every p is corrected by the
    number of pairs tested.
    """
    by_label = {agg.label: agg for agg in aggregates}
    if pairs == "all":
        labels = sorted(by_label)
        pair_list = [(labels[i], labels[j])
                     for i in range(len(labels)) for j in range(i + 1, len(labels))]
    else:
        pair_list = []
        for chunk in pairs.split(","):
            first, _, second = chunk.partition(":")
            if not second or first not in by_label or second not in by_label:
                raise ValueError(f"bad pair spec {chunk!r}")
            pair_list.append((first, second))

    rng = np.random.default_rng(bootstrap_seed)
    summary_rows = []
    for agg in aggregates:
        row = {"policy": agg.label, "episodes": agg.n_episodes}
        for prefix, sample in (("duration", agg.durations),
                               ("reward", agg.rewards),
                               ("infection", agg.infection_rates)):
            means = sample.per_seed_means()
            lo, hi = bootstrap_ci(means, n_resamples=n_resamples, rng=rng)
            key = {"duration": "mean_duration", "reward": "mean_reward",
                   "infection": "mean_infections_per_step"}[prefix]
            row[key] = float(sample.values.mean())
            row[f"{prefix}_ci_lo"] = lo
            row[f"{prefix}_ci_hi"] = hi
        summary_rows.append(row)

    m = max(1, len(pair_list))
    pairwise_rows = []
    for label_a, label_b in pair_list:
        result = mann_whitney_u(by_label[label_a].durations,
                                by_label[label_b].durations,
                                n_comparisons=m, alpha=alpha)
        pairwise_rows.append({
            "agent_a": label_a,
            "agent_b": label_b,
            "p_two_sided": result.p_two_sided,
            "p_one_sided": result.p_one_sided,
            "sig_two_sided": _sig_code(result.p_two_sided),
            "p_one_sided_corrected": result.p_one_sided_corrected,
            "sig_one_sided": _sig_code(result.p_one_sided_corrected),
            "winner": result.winner or "--",
        })
    return summary_rows, pairwise_rows


def _csv_cell(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def write_report(in_dir: Path, out_dir: Path | None = None, pairs: str = "all",
                 alpha: float = 0.05, n_resamples: int = 10_000,
                 bootstrap_seed: int = 0) -> str:
    """Generate summary.csv, pairwise.csv, and report.txt; returns the text."""
    in_dir = Path(in_dir)
    out_dir = in_dir if out_dir is None else Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    aggregates = load_policy_aggregates(in_dir)
    summary_rows, pairwise_rows = build_report(
        aggregates, pairs=pairs, alpha=alpha, n_resamples=n_resamples,
        bootstrap_seed=bootstrap_seed)

    summary_lines = [",".join(SUMMARY_COLUMNS)]
    summary_lines += [",".join(_csv_cell(row[c]) for c in SUMMARY_COLUMNS)
                      for row in summary_rows]
    (out_dir / "summary.csv").write_text("\n".join(summary_lines) + "\n",
                                         encoding="utf-8")

    pair_lines = [",".join(PAIRWISE_COLUMNS)]
    pair_lines += [",".join(_csv_cell(row[c]) for c in PAIRWISE_COLUMNS)
                   for row in pairwise_rows]
    (out_dir / "pairwise.csv").write_text("\n".join(pair_lines) + "\n",
                                          encoding="utf-8")

    text = format_report_text(summary_rows, pairwise_rows)
    (out_dir / "report.txt").write_text(text, encoding="utf-8")
    return text


def format_report_text(summary_rows, pairwise_rows) -> str:
    lines = ["Per-policy summary (95% bootstrap CIs from per-seed means)",
             ""]
    header = (f"{'policy':<14}{'episodes':>9}{'mean dur':>10}"
              f"{'CI lo':>9}{'CI hi':>9}{'mean rew':>10}{'inf/step':>10}")
    lines.append(header)
    lines.append("-" * len(header))
    for row in summary_rows:
        lines.append(
            f"{row['policy']:<14}{row['episodes']:>9}"
            f"{row['mean_duration']:>10.2f}{row['duration_ci_lo']:>9.2f}"
            f"{row['duration_ci_hi']:>9.2f}{row['mean_reward']:>10.2f}"
            f"{row['mean_infections_per_step']:>10.4f}")
    lines += ["", "Pairwise Mann-Whitney U tests on episode durations", ""]
    header = (f"{'agent_a':<14}{'agent_b':<14}{'p (2-sided)':>12}"
              f"{'p (1-sided)':>12}{'sig(2)':>7}{'corr p (1)':>12}"
              f"{'sig(1)':>7}  winner")
    lines.append(header)
    lines.append("-" * len(header))
    for row in pairwise_rows:
        lines.append(
            f"{row['agent_a']:<14}{row['agent_b']:<14}"
            f"{row['p_two_sided']:>12.4g}{row['p_one_sided']:>12.4g}"
            f"{row['sig_two_sided']:>7}{row['p_one_sided_corrected']:>12.4g}"
            f"{row['sig_one_sided']:>7}  {row['winner']}")
    return "\n".join(lines) + "\n"
