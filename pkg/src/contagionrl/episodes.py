"""Episode records: per-step logs, terminal summaries, serialization.

Summaries round-trip through CSV rows; full records (steps included)
round-trip through JSON lines.  Floats serialize via repr, so equal
records produce byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

CSV_COLUMNS = ("seed", "episode_idx", "duration", "truncated",
               "cumulative_reward", "total_infections", "infections_per_step")


@dataclass
class StepLog:
    t: int
    reward: float
    action: tuple[float, float, float]
    counts: dict
    new_infections: int
    agent_infected: bool
    terminated: bool
    truncated: bool


@dataclass
class EpisodeSummary:
    duration: int
    truncated: bool
    cumulative_reward: float
    total_infections: int
    infections_per_step: float


@dataclass
class EpisodeRecord:
    seed: int
    episode_idx: int
    steps: list[StepLog]
    summary: EpisodeSummary | None = None  # filled from the steps


def summary_to_row(seed: int, episode_idx: int, summary: EpisodeSummary) -> str:
    return ",".join([
        str(seed),
        str(episode_idx),
        str(summary.duration),
        str(int(summary.truncated)),
        repr(summary.cumulative_reward),
        str(summary.total_infections),
        repr(summary.infections_per_step),
    ])


def summary_from_row(row: str) -> tuple[int, int, EpisodeSummary]:
    parts = row.strip().split(",")
    if len(parts) != len(CSV_COLUMNS):
        raise ValueError(f"expected {len(CSV_COLUMNS)} columns, got {len(parts)}")
    seed, episode_idx = int(parts[0]), int(parts[1])
    return seed, episode_idx, EpisodeSummary(
        duration=int(parts[2]),
        truncated=bool(int(parts[3])),
        cumulative_reward=float(parts[4]),
        total_infections=int(parts[5]),
        infections_per_step=float(parts[6]),
    )


def record_to_jsonl(record: EpisodeRecord) -> str:
    """One header line plus one line per step."""
    header = {
        "seed": record.seed,
        "episode_idx": record.episode_idx,
        "summary": asdict(record.summary),
    }
    lines = [json.dumps(header, sort_keys=True)]
    for step in record.steps:
        lines.append(json.dumps(asdict(step), sort_keys=True))
    return "\n".join(lines) + "\n"


def record_from_jsonl(text: str) -> EpisodeRecord:
    lines = [line for line in text.splitlines() if line.strip()]
    header = json.loads(lines[0])
    steps = []
    for line in lines[1:]:
        payload = json.loads(line)
        payload["action"] = tuple(payload["action"])
        steps.append(StepLog(**payload))
    return EpisodeRecord(
        seed=header["seed"],
        episode_idx=header["episode_idx"],
        steps=steps,
        summary=EpisodeSummary(**header["summary"]),
    )
