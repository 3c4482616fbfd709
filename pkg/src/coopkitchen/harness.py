"""Seeded episode runner, experiment conditions, and summary statistics.

Every episode is fully determined by its :class:`EpisodeConfig`; logs are
JSON-lines (one record per tick) and replayable: re-applying the logged
actions reproduces every state digest and the final score.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy import stats

from .agents import AgentMind, AgentParams, note_execution, ntom_step, tom_step
from .assets import resolve_map
from .world import (
    Action,
    Kitchen,
    OrderSchedule,
    RECIPES,
    ScoreEvent,
    WorldState,
    default_recipe_for_map,
)

SEAT_TYPES = ("ntom", "tom", "human")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class EpisodeConfig:
    map_name: str
    roster: tuple[str, ...]
    seed: int = 0
    horizon: int = 500
    beta: float = 0.5
    likelihood_samples: int = 100
    recipe: str | None = None  # default: per-map recipe
    max_pending: int = 1
    respawn_delay: int = 1
    inter_arrival: int | None = None
    maps_dir: str | None = None

    def __post_init__(self) -> None:
        if not 2 <= len(self.roster) <= 4:
            raise ConfigError("roster size must be between 2 and 4")
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1")
        for seat in self.roster:
            if seat not in SEAT_TYPES:
                raise ConfigError(f"unknown seat type {seat!r}")

    def to_json(self) -> dict:
        return {
            "map": self.map_name,
            "roster": list(self.roster),
            "seed": self.seed,
            "horizon": self.horizon,
            "beta": self.beta,
            "likelihood_samples": self.likelihood_samples,
            "recipe": self.recipe,
            "max_pending": self.max_pending,
            "respawn_delay": self.respawn_delay,
            "inter_arrival": self.inter_arrival,
        }

    @staticmethod
    def from_json(data: Mapping) -> "EpisodeConfig":
        return EpisodeConfig(
            map_name=data["map"],
            roster=tuple(data["roster"]),
            seed=data["seed"],
            horizon=data["horizon"],
            beta=data.get("beta", 0.5),
            likelihood_samples=data.get("likelihood_samples", 100),
            recipe=data.get("recipe"),
            max_pending=data.get("max_pending", 1),
            respawn_delay=data.get("respawn_delay", 1),
            inter_arrival=data.get("inter_arrival"),
        )


@dataclass(frozen=True)
class TickRecord:
    tick: int
    digest: str  # digest of the post-transition state
    actions: tuple[str, ...]  # executed action per agent
    subtasks: tuple[str | None, ...]  # chosen subtask per agent
    beliefs: tuple[dict | None, ...]  # posterior snapshot for ToM seats
    score_delta: int
    events: tuple[dict, ...]

    def to_json(self) -> dict:
        return {
            "tick": self.tick,
            "digest": self.digest,
            "actions": list(self.actions),
            "subtasks": list(self.subtasks),
            "beliefs": list(self.beliefs),
            "score_delta": self.score_delta,
            "events": list(self.events),
        }

    @staticmethod
    def from_json(data: Mapping) -> "TickRecord":
        return TickRecord(
            tick=data["tick"],
            digest=data["digest"],
            actions=tuple(data["actions"]),
            subtasks=tuple(data["subtasks"]),
            beliefs=tuple(data["beliefs"]),
            score_delta=data["score_delta"],
            events=tuple(data["events"]),
        )


@dataclass(frozen=True)
class EpisodeLog:
    config: EpisodeConfig
    records: tuple[TickRecord, ...]
    final_score: int

    def to_jsonl(self) -> str:
        lines = [json.dumps({"kind": "config", **self.config.to_json()}, sort_keys=True)]
        for rec in self.records:
            lines.append(json.dumps({"kind": "tick", **rec.to_json()}, sort_keys=True))
        lines.append(
            json.dumps({"kind": "final", "score": self.final_score}, sort_keys=True)
        )
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl())

    @staticmethod
    def from_jsonl(text: str) -> "EpisodeLog":
        config = None
        records: list[TickRecord] = []
        final = 0
        for line in text.splitlines():
            if not line.strip():
                continue
            data = json.loads(line)
            kind = data.pop("kind")
            if kind == "config":
                config = EpisodeConfig.from_json(data)
            elif kind == "tick":
                records.append(TickRecord.from_json(data))
            elif kind == "final":
                final = data["score"]
        if config is None:
            raise ValueError("log has no config line")
        return EpisodeLog(config, tuple(records), final)

    @staticmethod
    def load(path: str | Path) -> "EpisodeLog":
        return EpisodeLog.from_jsonl(Path(path).read_text())


def behavior_rng(seed: int, agent: int) -> random.Random:
    return random.Random(f"{seed}/behavior/{agent}")


def belief_rng(seed: int, observer: int, teammate: int, tick: int) -> random.Random:
    """Inference noise is a separate stream per observer-teammate pair, re-seeded
    each tick so any logged posterior can be recomputed from (state, action)
    alone."""
    return random.Random(f"{seed}/belief/{observer}/{teammate}/{tick}")


def kitchen_for(config: EpisodeConfig) -> Kitchen:
    gmap = resolve_map(config.map_name, config.maps_dir)
    recipe = RECIPES[config.recipe] if config.recipe else default_recipe_for_map(gmap.name)
    schedule = OrderSchedule(
        max_pending=config.max_pending,
        respawn_delay=config.respawn_delay,
        inter_arrival=config.inter_arrival,
    )
    return Kitchen(gmap, recipe, schedule)


class EpisodeDriver:
    """Steps one episode tick at a time; shared by the headless runner and the
    live play server so agent seats behave identically in both."""

    def __init__(self, config: EpisodeConfig, kitchen: Kitchen | None = None):
        self.config = config
        self.kitchen = kitchen or kitchen_for(config)
        self.state = self.kitchen.initial_state(len(config.roster))
        self.minds = [AgentMind() for _ in config.roster]
        self.params = [
            AgentParams(
                beta=config.beta,
                tom_enabled=(seat == "tom"),
                likelihood_samples=config.likelihood_samples,
            )
            for seat in config.roster
        ]
        self.behavior_rngs = [
            behavior_rng(config.seed, i) for i in range(len(config.roster))
        ]
        self.prev_state: WorldState | None = None
        self.observed: dict[int, Action] | None = None
        self.records: list[TickRecord] = []

    def agent_action(self, seat: int) -> Action:
        kind = self.config.roster[seat]
        if kind == "tom":
            belief_rngs = {
                mate: belief_rng(self.config.seed, seat, mate, self.state.tick)
                for mate in range(len(self.config.roster))
                if mate != seat
            }
            return tom_step(
                self.kitchen,
                self.state,
                self.prev_state,
                self.observed,
                seat,
                self.minds[seat],
                self.params[seat],
                self.behavior_rngs[seat],
                belief_rngs,
            )
        return ntom_step(
            self.kitchen,
            self.state,
            seat,
            self.minds[seat],
            self.params[seat],
            self.behavior_rngs[seat],
        )

    def advance(self, human_actions: Mapping[int, Action] | None = None) -> list[ScoreEvent]:
        """Collect every seat's action (humans from ``human_actions``,
        defaulting to stay), apply them jointly, and log the tick."""
        t = self.state.tick
        joint: list[Action] = []
        for seat, kind in enumerate(self.config.roster):
            if kind == "human":
                joint.append((human_actions or {}).get(seat, Action.STAY))
            else:
                joint.append(self.agent_action(seat))
        new_state, events, executed = self.kitchen.step(self.state, joint)
        for seat, kind in enumerate(self.config.roster):
            if kind != "human":
                note_execution(self.minds[seat], executed[seat], new_state, seat)
        self.records.append(
            TickRecord(
                tick=t,
                digest=new_state.digest(),
                actions=tuple(a.value for a in executed),
                subtasks=tuple(
                    self.minds[i].current.key() if self.minds[i].current else None
                    for i in range(len(joint))
                ),
                beliefs=tuple(
                    {
                        str(mate): post.to_json()
                        for mate, post in self.minds[i].beliefs.items()
                    }
                    if self.config.roster[i] == "tom"
                    else None
                    for i in range(len(joint))
                ),
                score_delta=sum(e.points for e in events),
                events=tuple(
                    {"tick": e.tick, "order_id": e.order_id, "points": e.points}
                    for e in events
                ),
            )
        )
        self.prev_state = self.state
        self.observed = {i: a for i, a in enumerate(executed)}
        self.state = new_state
        return events

    @property
    def done(self) -> bool:
        return self.state.tick >= self.config.horizon

    def log(self) -> EpisodeLog:
        return EpisodeLog(self.config, tuple(self.records), self.state.score)


def run_episode(
    config: EpisodeConfig,
    human_traces: Mapping[int, Sequence[Action]] | None = None,
) -> EpisodeLog:
    """Run one headless episode. Human seats need a scripted trace; without
    one the config is rejected (live play goes through the play server)."""
    human_seats = [i for i, s in enumerate(config.roster) if s == "human"]
    for seat in human_seats:
        if human_traces is None or seat not in human_traces:
            raise ConfigError(
                f"human seat {seat} in a headless run requires an action trace"
            )
    driver = EpisodeDriver(config)
    while not driver.done:
        t = driver.state.tick
        humans = {
            seat: (
                human_traces[seat][t]
                if t < len(human_traces[seat])
                else Action.STAY
            )
            for seat in human_seats
        }
        driver.advance(humans)
    return driver.log()


class ReplayError(ValueError):
    pass


def replay_episode(log: EpisodeLog) -> int:
    """Re-apply the logged actions through the transition function, verifying
    every state digest; returns the replayed final score."""
    kitchen = kitchen_for(log.config)
    state = kitchen.initial_state(len(log.config.roster))
    for rec in log.records:
        if rec.tick != state.tick:
            raise ReplayError(f"tick mismatch: log {rec.tick}, state {state.tick}")
        joint = [Action(a) for a in rec.actions]
        state, _events, _executed = kitchen.step(state, joint)
        if state.digest() != rec.digest:
            raise ReplayError(f"digest mismatch at tick {rec.tick}")
    if state.score != log.final_score:
        raise ReplayError(
            f"final score mismatch: replay {state.score}, log {log.final_score}"
        )
    return state.score


# -- conditions -----------------------------------------------------------


@dataclass(frozen=True)
class MapStats:
    map_name: str
    runs: int
    mean: float
    sd: float
    ci_lo: float
    ci_hi: float
    scores: tuple[int, ...]
    seeds: tuple[int, ...]


@dataclass(frozen=True)
class ConditionSummary:
    label: str
    roster: tuple[str, ...]
    per_map: tuple[MapStats, ...]
    horizon: int
    base_seed: int

    @property
    def maps(self) -> tuple[str, ...]:
        return tuple(m.map_name for m in self.per_map)

    @property
    def pooled_scores(self) -> tuple[int, ...]:
        return tuple(s for m in self.per_map for s in m.scores)

    @property
    def pooled_mean(self) -> float:
        return float(np.mean(self.pooled_scores))

    def map_stats(self, map_name: str) -> MapStats:
        for m in self.per_map:
            if m.map_name == map_name:
                return m
        raise KeyError(map_name)

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "roster": list(self.roster),
            "horizon": self.horizon,
            "base_seed": self.base_seed,
            "per_map": [
                {
                    "map": m.map_name,
                    "runs": m.runs,
                    "mean": m.mean,
                    "sd": m.sd,
                    "ci_lo": m.ci_lo,
                    "ci_hi": m.ci_hi,
                    "scores": list(m.scores),
                    "seeds": list(m.seeds),
                }
                for m in self.per_map
            ],
        }

    @staticmethod
    def from_json(data: Mapping) -> "ConditionSummary":
        return ConditionSummary(
            label=data["label"],
            roster=tuple(data["roster"]),
            horizon=data["horizon"],
            base_seed=data["base_seed"],
            per_map=tuple(
                MapStats(
                    map_name=m["map"],
                    runs=m["runs"],
                    mean=m["mean"],
                    sd=m["sd"],
                    ci_lo=m["ci_lo"],
                    ci_hi=m["ci_hi"],
                    scores=tuple(m["scores"]),
                    seeds=tuple(m["seeds"]),
                )
            for m in data["per_map"]),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2, sort_keys=True))

    @staticmethod
    def load(path: str | Path) -> "ConditionSummary":
        return ConditionSummary.from_json(json.loads(Path(path).read_text()))


def mean_ci(scores: Sequence[float], confidence: float = 0.95) -> tuple[float, float, float, float]:
    arr = np.asarray(scores, dtype=float)
    mean = float(arr.mean())
    if len(arr) < 2:
        return mean, 0.0, mean, mean
    sd = float(arr.std(ddof=1))
    half = sd / math.sqrt(len(arr)) * stats.t.ppf((1 + confidence) / 2, len(arr) - 1)
    return mean, sd, mean - half, mean + half


def condition_label(roster: Sequence[str]) -> str:
    pretty = {"ntom": "nToM", "tom": "ToM", "human": "Human"}
    if len(roster) == 2:
        a, b = sorted(roster, key=lambda s: (s != "tom", s != "human"))
        return f"{pretty[a]}-{pretty[b]}"
    n_tom = sum(1 for s in roster if s == "tom")
    return f"{n_tom}-ToM-of-{len(roster)}"


def run_condition(
    roster: Sequence[str],
    maps: Sequence[str],
    runs_per_map: int,
    base_seed: int,
    label: str | None = None,
    horizon: int = 500,
    beta: float = 0.5,
    out_dir: str | Path | None = None,
    maps_dir: str | None = None,
    progress: Callable[[str], None] | None = None,
) -> ConditionSummary:
    """Run ``runs_per_map`` seeded episodes on every map; episode seeds are
    ``base_seed + index`` (map-major) and are published in the summary."""
    roster = tuple(roster)
    label = label or condition_label(roster)
    per_map: list[MapStats] = []
    index = 0
    for map_name in maps:
        scores: list[int] = []
        seeds: list[int] = []
        for _ in range(runs_per_map):
            seed = base_seed + index
            index += 1
            config = EpisodeConfig(
                map_name=map_name,
                roster=roster,
                seed=seed,
                horizon=horizon,
                beta=beta,
                maps_dir=maps_dir,
            )
            log = run_episode(config)
            scores.append(log.final_score)
            seeds.append(seed)
            if out_dir is not None:
                dest = Path(out_dir) / label.replace("/", "_")
                dest.mkdir(parents=True, exist_ok=True)
                log.save(dest / f"{map_name}_seed{seed}.jsonl")
            if progress is not None:
                progress(f"{label} {map_name} seed={seed} score={scores[-1]}")
        mean, sd, lo, hi = mean_ci(scores)
        per_map.append(
            MapStats(map_name, runs_per_map, mean, sd, lo, hi, tuple(scores), tuple(seeds))
        )
    return ConditionSummary(label, roster, tuple(per_map), horizon, base_seed)


def summary_csv(
    summary: ConditionSummary, baseline: ConditionSummary | None = None
) -> str:
    """The delimited contract: one row per map plus a pooled row. Normalized
    means divide by the baseline's per-map mean (1.0 when the summary is its
    own baseline)."""
    base = baseline or summary

    def norm(value: float, reference: float) -> float:
        if reference:
            return value / reference
        return 1.0 if value == reference else float("nan")

    rows = []
    for m in summary.per_map:
        base_mean = base.map_stats(m.map_name).mean
        rows.append(
            [summary.label, m.map_name, m.runs, m.mean, m.sd, m.ci_lo, m.ci_hi,
             norm(m.mean, base_mean)]
        )
    pooled = summary.pooled_scores
    mean, sd, lo, hi = mean_ci(pooled)
    rows.append(
        [summary.label, "pooled", len(pooled), mean, sd, lo, hi,
         norm(mean, base.pooled_mean)]
    )
    out = ["condition,map,runs,mean,sd,ci_lo,ci_hi,normalized_mean"]
    for row in rows:
        out.append(
            ",".join(
                f"{v:.4f}" if isinstance(v, float) else str(v) for v in row
            )
        )
    return "\n".join(out) + "\n"


@dataclass(frozen=True)
class ComparisonReport:
    label_a: str
    label_b: str
    per_map_diff: tuple[tuple[str, float], ...]  # (map, mean_a - mean_b)
    pooled_diff: float
    welch_t: float
    p_one_sided: float  # H1: mean(a) > mean(b)
    normalized_a: tuple[tuple[str, float], ...]  # mean_a / mean_b per map
    normalized_b: tuple[tuple[str, float], ...]  # 1.0 per map by construction

    def to_json(self) -> dict:
        return {
            "a": self.label_a,
            "b": self.label_b,
            "per_map_diff": dict(self.per_map_diff),
            "pooled_diff": self.pooled_diff,
            "welch_t": self.welch_t,
            "p_one_sided": self.p_one_sided,
            "normalized_a": dict(self.normalized_a),
            "normalized_b": dict(self.normalized_b),
        }

    def format_text(self) -> str:
        lines = [f"{self.label_a} vs {self.label_b}"]
        for map_name, diff in self.per_map_diff:
            norm = dict(self.normalized_a)[map_name]
            lines.append(f"  {map_name}: diff={diff:+.1f}  normalized={norm:.3f}")
        lines.append(
            f"  pooled: diff={self.pooled_diff:+.1f}  "
            f"welch_t={self.welch_t:.3f}  p(one-sided)={self.p_one_sided:.4g}"
        )
        return "\n".join(lines)


def compare_conditions(a: ConditionSummary, b: ConditionSummary) -> ComparisonReport:
    """Directional comparison of two conditions run on the same maps with the
    same run counts: per-map and pooled differences, pooled Welch t with a
    one-sided p for mean(a) > mean(b), and scores normalized by b per map."""
    if a.maps != b.maps:
        raise ValueError(f"map sets differ: {a.maps} vs {b.maps}")
    for ma, mb in zip(a.per_map, b.per_map):
        if ma.runs != mb.runs:
            raise ValueError(f"run counts differ on {ma.map_name}")
    per_map_diff = tuple(
        (ma.map_name, ma.mean - mb.mean) for ma, mb in zip(a.per_map, b.per_map)
    )
    pooled_a = np.asarray(a.pooled_scores, dtype=float)
    pooled_b = np.asarray(b.pooled_scores, dtype=float)
    if np.allclose(pooled_a, pooled_b):
        t_stat, p = 0.0, 0.5
    else:
        res = stats.ttest_ind(pooled_a, pooled_b, equal_var=False, alternative="greater")
        t_stat, p = float(res.statistic), float(res.pvalue)
    normalized_a = tuple(
        (ma.map_name, ma.mean / mb.mean if mb.mean else float("nan"))
        for ma, mb in zip(a.per_map, b.per_map)
    )
    normalized_b = tuple((mb.map_name, 1.0) for mb in b.per_map)
    return ComparisonReport(
        a.label,
        b.label,
        per_map_diff,
        float(pooled_a.mean() - pooled_b.mean()),
        t_stat,
        p,
        normalized_a,
        normalized_b,
    )


# -- multi-agent sweep ------------------------------------------------------

PAPER_RUNS_PER_MAP = {2: 30, 3: 9, 4: 2}


def sweep_rosters(team_sizes: Iterable[int]) -> list[tuple[str, ...]]:
    out = []
    for n in team_sizes:
        for k in range(n + 1):
            out.append(tuple(["tom"] * k + ["ntom"] * (n - k)))
    return out


def run_sweep(
    team_sizes: Sequence[int],
    maps: Sequence[str],
    base_seed: int,
    runs_per_map: Mapping[int, int] | int | None = None,
    horizon: int = 500,
    out_dir: str | Path | None = None,
    progress: Callable[[str], None] | None = None,
) -> list[ConditionSummary]:
    """The team-size x ToM-count grid of conditions (defaults follow the
    reference design: 30/9/2 runs per map for 2/3/4-agent teams)."""
    summaries = []
    for roster in sweep_rosters(team_sizes):
        n = len(roster)
        if runs_per_map is None:
            runs = PAPER_RUNS_PER_MAP[n]
        elif isinstance(runs_per_map, int):
            runs = runs_per_map
        else:
            runs = runs_per_map[n]
        summaries.append(
            run_condition(
                roster,
                maps,
                runs,
                base_seed,
                horizon=horizon,
                out_dir=out_dir,
                progress=progress,
            )
        )
    return summaries


@dataclass(frozen=True)
class ScalingFit:
    """OLS of score on (#agents, #ToM, #agents x #ToM) with intercept."""

    coef: dict[str, float]
    se: dict[str, float]
    t: dict[str, float]
    p_two_sided: dict[str, float]
    p_one_sided_positive: dict[str, float]
    n: int

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "terms": {
                name: {
                    "coef": self.coef[name],
                    "se": self.se[name],
                    "t": self.t[name],
                    "p_two_sided": self.p_two_sided[name],
                    "p_one_sided_positive": self.p_one_sided_positive[name],
                }
                for name in self.coef
            },
        }


def fit_team_scaling(rows: Sequence[tuple[int, int, float]]) -> ScalingFit:
    """``rows`` is (n_agents, n_tom, score) per episode."""
    names = ["intercept", "n_agents", "n_tom", "interaction"]
    X = np.array([[1.0, n, k, n * k] for n, k, _ in rows])
    y = np.array([s for _, _, s in rows], dtype=float)
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    dof = len(y) - X.shape[1]
    sigma2 = float(resid @ resid) / dof
    cov = sigma2 * np.linalg.inv(X.T @ X)
    se = np.sqrt(np.diag(cov))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, coef / np.where(se > 0, se, 1.0), 0.0)
    p_two = 2 * stats.t.sf(np.abs(t), dof)
    p_pos = stats.t.sf(t, dof)  # H1: coefficient > 0
    return ScalingFit(
        coef=dict(zip(names, map(float, coef))),
        se=dict(zip(names, map(float, se))),
        t=dict(zip(names, map(float, t))),
        p_two_sided=dict(zip(names, map(float, p_two))),
        p_one_sided_positive=dict(zip(names, map(float, p_pos))),
        n=len(y),
    )


def scaling_rows(summaries: Sequence[ConditionSummary]) -> list[tuple[int, int, float]]:
    rows = []
    for summary in summaries:
        n = len(summary.roster)
        k = sum(1 for s in summary.roster if s == "tom")
        for score in summary.pooled_scores:
            rows.append((n, k, float(score)))
    return rows
