"""
Paired comparison of the synthesized central model against a fresh central
model and the FedAvg baseline.

For every seed all arms consume the same normalized split, the same edge
partition and the same central validation rows; the partition hash on each
result records this.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.analytics.layer_stats import compute_layer_stats
from src.analytics.ranking import contribution_score
from src.analytics.selection import select_layers
from src.bench.convergence import ConvergenceCriterion, epochs_to_converge
from src.data.cleaner import FlowSchema, ingest_csv
from src.data.dataset import Dataset, EdgePartition, SplitPair
from src.data.preprocessing import apply_normalization, fit_normalization, partition_edges, split_80_20
from src.data.synthetic import SynthConfig, apply_edge_jitter, generate_synthetic
from src.detection.detector import (
    DetectionReport,
    calibrate,
    classify,
    macro_average,
    micro_average,
    parse_method,
    score,
)
from src.edge.trainer import EdgeModelSet, train_edges
from src.federated.config import BYTES_PER_PARAM, FLConfig
from src.federated.fedavg import fl_run
from src.nn.config import TrainConfig
from src.nn.cost import estimate_cost
from src.nn.network import Network, autoencoder_shape, init_network
from src.nn.training import TrainTrace, train
from src.synthesis.plan import SynthesisPlan, plan_options
from src.synthesis.synthesizer import fine_tune, synthesize
from src.utils.errors import CalibrationError, ConfigurationError, PartitionError, SLSError
from src.utils.helpers import hash_arrays, package_versions

logger = logging.getLogger(__name__)

ARMS = ('fresh_central', 'synthesized', 'fl')
# Wall-clock fields, left out of deterministic digests and manifests
TIMING_FIELDS = ('seconds_per_epoch', 'time_to_converge')


@dataclass
class ExperimentConfig:
    seeds: List[int] = field(default_factory=lambda: [0])
    source: str = 'synthetic'
    path: Optional[str] = None
    schema: Optional[str] = None
    normalization: str = 'minmax'
    train_normal_only: bool = True
    synthetic: SynthConfig = field(default_factory=SynthConfig)
    m: int = 2
    s_train: int = 2000
    s_test: int = 400
    edge_hidden: List[int] = field(default_factory=lambda: [60] * 7)
    jitter: float = 0.0
    parallel_edges: bool = False
    training: TrainConfig = field(default_factory=TrainConfig)
    fine_tune: Optional[TrainConfig] = None
    variant: str = 'l1'
    rule: str = 'endpoint_delta'
    plans: List[Dict[str, Any]] = field(default_factory=lambda: [{'name': 'all', 'policy': 'all'}])
    central_hidden: Optional[List[int]] = None
    detection_method: str = 'percentile:0.99'
    federated: FLConfig = field(default_factory=FLConfig)
    criterion: ConvergenceCriterion = field(default_factory=ConvergenceCriterion)
    arms: Tuple[str, ...] = ARMS
    parallel_seeds: bool = False

    @property
    def central_config(self) -> TrainConfig:
        return self.fine_tune or self.training

    def validate(self) -> 'ExperimentConfig':
        if not self.seeds:
            raise ConfigurationError("At least one seed is required")
        if self.source not in ('synthetic', 'csv'):
            raise ConfigurationError(f"data.source must be 'synthetic' or 'csv', got {self.source!r}")
        if self.source == 'csv' and not self.path:
            raise ConfigurationError("data.source csv needs data.path")
        unknown = sorted(set(self.arms) - set(ARMS))
        if unknown:
            raise ConfigurationError(f"Unknown arms {unknown}; use any of {ARMS}")
        if not self.plans and 'synthesized' in self.arms:
            raise ConfigurationError("The synthesized arm needs at least one plan")
        names = [p.get('name', f"plan{i + 1}") for i, p in enumerate(self.plans)]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"Plan names must be unique, got {names}")
        for spec in self.plans:
            plan_options(spec)
        self.training.validate()
        self.central_config.validate()
        self.federated.validate()
        self.criterion.validate()
        parse_method(self.detection_method)
        return self

    def to_dict(self) -> Dict[str, Any]:
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        for key in ('synthetic', 'training', 'federated', 'criterion'):
            data[key] = data[key].to_dict()
        data['fine_tune'] = self.fine_tune.to_dict() if self.fine_tune else None
        data['arms'] = list(self.arms)
        return data

    @classmethod
    def from_config(cls, config: Dict[str, Any], **overrides: Any) -> 'ExperimentConfig':
        """
        Build from the full YAML config (sections data, synthetic, edges,
        training, fine_tune, analysis, synthesis, detection, federated, bench).
        Non-None ``overrides`` replace top-level fields.
        """
        data = config.get('data') or {}
        edges = config.get('edges') or {}
        analysis = config.get('analysis') or {}
        synthesis = config.get('synthesis') or {}
        bench = config.get('bench') or {}
        training = TrainConfig.from_dict(config.get('training'))
        fine_tune_section = config.get('fine_tune')
        seeds = bench.get('seeds', [0])
        if isinstance(seeds, int):
            seeds = list(range(seeds))

        built = cls(
            seeds=[int(s) for s in seeds],
            source=data.get('source', 'synthetic'),
            path=data.get('path'),
            schema=data.get('schema'),
            normalization=data.get('normalization', 'minmax'),
            train_normal_only=bool(data.get('train_normal_only', True)),
            synthetic=SynthConfig.from_dict(config.get('synthetic')),
            m=int(edges.get('m', 2)),
            s_train=int(edges.get('s_train', 2000)),
            s_test=int(edges.get('s_test', 400)),
            edge_hidden=[int(w) for w in edges.get('hidden', [60] * 7)],
            jitter=float(edges.get('jitter', 0.0)),
            parallel_edges=bool(edges.get('parallel', False)),
            training=training,
            fine_tune=(TrainConfig.from_dict({**(config.get('training') or {}), **fine_tune_section})
                       if fine_tune_section else None),
            variant=analysis.get('variant', 'l1'),
            rule=analysis.get('rule', 'endpoint_delta'),
            plans=list(synthesis.get('plans') or [{'name': 'all', 'policy': 'all'}]),
            central_hidden=synthesis.get('central_hidden'),
            detection_method=(config.get('detection') or {}).get('method', 'percentile:0.99'),
            federated=FLConfig.from_dict(config.get('federated')),
            criterion=ConvergenceCriterion.from_dict(bench.get('criterion')),
            arms=tuple(bench.get('arms', ARMS)),
            parallel_seeds=bool(bench.get('parallel', False)),
        )
        return replace(built, **{k: v for k, v in overrides.items() if v is not None})


@dataclass
class ArmResult:
    """Outcome of one arm for one seed; ``failure`` is set when the arm could not run."""
    arm: str
    name: str
    seed: int
    shape: List[int] = field(default_factory=list)
    n_params: int = 0
    partition_hash: str = ''
    epochs_run: int = 0
    epochs_to_converge: Optional[int] = None
    seconds_per_epoch: Optional[float] = None
    time_to_converge: Optional[float] = None
    final_val_rmse: Optional[float] = None
    accuracy: Optional[float] = None
    fpr: Optional[float] = None
    detection: Optional[Dict[str, Any]] = None
    cost_per_epoch: Optional[int] = None
    compute_to_converge: Optional[int] = None
    compute_total: Optional[int] = None
    bytes_exchanged: Optional[int] = None
    fraction_pretrained: Optional[float] = None
    matched_fresh: Optional[str] = None
    val_curve: List[float] = field(default_factory=list)
    train_curve: List[float] = field(default_factory=list)
    failure: Optional[str] = None

    @property
    def converged(self) -> bool:
        return self.epochs_to_converge is not None

    def to_dict(self, deterministic: bool = False) -> Dict[str, Any]:
        data = asdict(self)
        if deterministic:
            for key in TIMING_FIELDS:
                data.pop(key)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ArmResult':
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})


def shape_label(shape: Sequence[int]) -> str:
    return '-'.join(str(w) for w in shape)


def _float_list(values: Sequence[float]) -> List[float]:
    return [float(v) for v in values]


def _detect(net: Network, calibration: Dataset, test: Dataset, method: str) -> Optional[DetectionReport]:
    """Calibrate on ``calibration`` (its normal rows unless roc_opt) and classify ``test``."""
    if not test.has_labels:
        return None
    try:
        if parse_method(method)['method'] == 'roc_opt':
            threshold = calibrate(score(net, calibration.features), method, calibration.labels)
        else:
            threshold = calibrate(score(net, calibration.normal_only().features), method)
    except CalibrationError as e:
        logger.warning(f"Detection skipped: {e}")
        return None
    return classify(score(net, test.features), threshold, test.labels)


def _fill_from_trace(result: ArmResult, curve: Sequence[float], train_curve: Sequence[float],
                     seconds: Sequence[float], criterion: ConvergenceCriterion) -> None:
    result.val_curve = _float_list(curve)
    result.train_curve = _float_list(train_curve)
    result.epochs_run = len(curve)
    result.final_val_rmse = float(curve[-1]) if len(curve) else None
    if not len(curve):
        return
    result.epochs_to_converge = epochs_to_converge(curve, criterion)
    result.seconds_per_epoch = float(np.mean(seconds))
    if result.converged:
        result.time_to_converge = float(np.sum(seconds[:result.epochs_to_converge]))


def _fill_detection(result: ArmResult, report: Optional[DetectionReport]) -> None:
    if report is None:
        return
    result.detection = report.to_dict()
    result.accuracy = report.accuracy
    result.fpr = report.fpr


def _partition_hashes(partition: EdgePartition) -> Dict[str, str]:
    hashes = {}
    for k, pair in enumerate(partition.edges, start=1):
        hashes[f'edge{k}_train'] = pair.train.content_hash()
        hashes[f'edge{k}_test'] = pair.test.content_hash()
    hashes['central_train'] = partition.central.train.content_hash()
    hashes['central_test'] = partition.central.test.content_hash()
    return hashes


def prepare_partition(cfg: ExperimentConfig, seed: int, dataset: Optional[Dataset] = None) -> EdgePartition:
    """
    Data for one seed: generate (or reuse) rows, split 80:20, normalize with
    a record fitted on the training rows, carve edge blocks, apply jitter.
    """
    ds = dataset if dataset is not None else generate_synthetic(replace(cfg.synthetic, seed=seed))
    split = split_80_20(ds, seed)
    record = fit_normalization(split.train.features, cfg.normalization)
    split = SplitPair(apply_normalization(split.train, record), apply_normalization(split.test, record))
    partition = partition_edges(split, cfg.m, cfg.s_train, cfg.s_test)
    if partition.central is None:
        raise PartitionError(f"No rows left for the central cloud after {cfg.m} edges x "
                             f"{cfg.s_train}/{cfg.s_test} rows")
    return apply_edge_jitter(partition, cfg.jitter, seed)


def _central_sets(cfg: ExperimentConfig, partition: EdgePartition) -> Tuple[Dataset, Dataset]:
    central = partition.central
    if cfg.train_normal_only:
        return central.train.normal_only(), central.test.normal_only()
    return central.train, central.test


def _edge_compute(edges: EdgeModelSet, partition: EdgePartition, train_normal_only: bool) -> int:
    total = 0
    for k, (net, trace) in enumerate(zip(edges.models, edges.traces), start=1):
        rows = partition.edge(k).train
        rows = rows.normal_only() if train_normal_only else rows
        total += trace.n_epochs * estimate_cost(net.shape, rows.n_rows).per_epoch_ops
    return total


def _run_central_arm(result: ArmResult, net: Network, trace: TrainTrace, central_train: Dataset,
                     cfg: ExperimentConfig, partition: EdgePartition, extra_compute: int = 0) -> None:
    _fill_from_trace(result, trace.val_rmse, trace.train_rmse, trace.seconds, cfg.criterion)
    cost = estimate_cost(net.shape, central_train.n_rows).per_epoch_ops
    result.cost_per_epoch = cost
    result.compute_total = extra_compute + cost * result.epochs_run
    if result.converged:
        result.compute_to_converge = extra_compute + cost * result.epochs_to_converge
    _fill_detection(result, _detect(net, partition.central.train, partition.central.test, cfg.detection_method))


def run_seed(cfg: ExperimentConfig, seed: int, dataset: Optional[Dataset] = None) -> Tuple[List[ArmResult], Dict[str, str]]:
    """
    Run every configured arm for one seed.

    Arm failures (SLSError) are recorded on the result instead of raised.

    Returns:
        (arm results, dataset hashes of every block)
    """
    partition = prepare_partition(cfg, seed, dataset)
    hashes = _partition_hashes(partition)
    partition_hash = hash_arrays([np.frombuffer(''.join(sorted(hashes.values())).encode(), dtype=np.uint8)])
    central_train, central_val = _central_sets(cfg, partition)
    n_features = central_train.n_features
    training = cfg.training.replace(seed=seed)
    central_cfg = cfg.central_config.replace(seed=seed)
    results: List[ArmResult] = []

    def new_result(arm: str, name: str) -> ArmResult:
        result = ArmResult(arm=arm, name=name, seed=seed, partition_hash=partition_hash)
        results.append(result)
        return result

    edges, edge_error, edge_compute = None, None, 0
    if 'synthesized' in cfg.arms:
        try:
            edges = train_edges(partition, autoencoder_shape(n_features, cfg.edge_hidden), training,
                                parallel=cfg.parallel_edges, train_normal_only=cfg.train_normal_only)
            edge_compute = _edge_compute(edges, partition, cfg.train_normal_only)
        except SLSError as e:
            edge_error = f"edge training failed: {e}"
            logger.error(f"Seed {seed}: {edge_error}")

    central_shapes: Dict[str, List[int]] = {}
    if 'synthesized' in cfg.arms:
        scores = []
        if edges is not None:
            stats = [compute_layer_stats(trace, k) for k, trace in enumerate(edges.traces, start=1)]
            scores = [contribution_score(s, cfg.variant, cfg.rule) for s in stats]
        for index, spec in enumerate(cfg.plans, start=1):
            name = spec.get('name', f"plan{index}")
            result = new_result('synthesized', name)
            if edge_error:
                result.failure = edge_error
                continue
            try:
                mask = select_layers(scores, spec.get('policy', 'all'))
                plan = SynthesisPlan.from_mask(mask, name=name, **plan_options(spec))
                model = synthesize(edges, plan, n_features, central_cfg)
                result.shape, result.n_params = model.net.shape, model.net.n_params
                result.fraction_pretrained = model.fraction_pretrained
                result.bytes_exchanged = model.copied_params * BYTES_PER_PARAM
                trace = fine_tune(model, central_train, central_val, central_cfg, partition)
                _run_central_arm(result, model.net, trace, central_train, cfg, partition, edge_compute)
                label = shape_label(model.net.shape)
                central_shapes.setdefault(label, model.net.shape)
                result.matched_fresh = label
            except SLSError as e:
                result.failure = str(e)
                logger.error(f"Seed {seed}, plan {name}: {e}")

    if not central_shapes and cfg.central_hidden:
        shape = autoencoder_shape(n_features, cfg.central_hidden)
        central_shapes[shape_label(shape)] = shape

    if 'fresh_central' in cfg.arms:
        if not central_shapes:
            new_result('fresh_central', 'unknown').failure = "no central shape (no plan synthesized, no central_hidden)"
        for label, shape in central_shapes.items():
            result = new_result('fresh_central', label)
            try:
                net = init_network(shape, config=central_cfg)
                result.shape, result.n_params = net.shape, net.n_params
                trace = train(net, central_train.features, central_val.features, central_cfg, desc="Fresh central")
                _run_central_arm(result, net, trace, central_train, cfg, partition)
            except SLSError as e:
                result.failure = str(e)
                logger.error(f"Seed {seed}, fresh central {label}: {e}")

    if 'fl' in cfg.arms:
        result = new_result('fl', 'fedavg')
        try:
            fl_cfg = cfg.federated.replace(clients=cfg.m, seed=seed)
            explicit = any(v is not None for v in (fl_cfg.shape, fl_cfg.hidden, fl_cfg.preset))
            if not explicit:
                if not central_shapes:
                    raise ConfigurationError("FL needs a shape: set federated.shape/hidden/preset or run a plan")
                fl_cfg = fl_cfg.replace(shape=next(iter(central_shapes.values())))
            fl_trace, global_net = fl_run(partition, fl_cfg, validation=partition.central.test,
                                          calibration=partition.central.train,
                                          train_normal_only=cfg.train_normal_only)
            result.shape, result.n_params = global_net.shape, global_net.n_params
            client_rows = [partition.edge(k).train for k in range(1, cfg.m + 1)]
            if cfg.train_normal_only:
                client_rows = [ds.normal_only() for ds in client_rows]
            round_cost = fl_cfg.local_epochs * sum(
                estimate_cost(global_net.shape, ds.n_rows).per_epoch_ops for ds in client_rows)
            _fill_from_trace(result, fl_trace.val_rmse, [float(np.mean(c)) for c in fl_trace.client_losses],
                             fl_trace.seconds, cfg.criterion)
            result.cost_per_epoch = round_cost
            result.compute_total = round_cost * result.epochs_run
            result.bytes_exchanged = fl_trace.bytes_exchanged
            if result.converged:
                result.compute_to_converge = round_cost * result.epochs_to_converge
            _fill_detection(result, _detect(global_net, partition.central.train, partition.central.test,
                                            cfg.detection_method))
        except SLSError as e:
            result.failure = str(e)
            logger.error(f"Seed {seed}, FL: {e}")

    return results, hashes


def _median(values: Sequence[Optional[float]]) -> Optional[float]:
    v = [x for x in values if x is not None and np.isfinite(x)]
    return float(np.median(v)) if v else None


def _iqr(values: Sequence[Optional[float]]) -> Optional[float]:
    v = [x for x in values if x is not None and np.isfinite(x)]
    if len(v) < 2:
        return None
    q1, q3 = np.percentile(v, [25, 75])
    return float(q3 - q1)


def _relative_improvement(baseline: Optional[float], candidate: Optional[float]) -> Optional[float]:
    if baseline is None or candidate is None or baseline == 0:
        return None
    return (baseline - candidate) / baseline


@dataclass
class ComparisonReport:
    results: List[ArmResult]
    seeds: List[int]
    criterion: Dict[str, Any] = field(default_factory=dict)
    config: Dict[str, Any] = field(default_factory=dict)
    hashes: Dict[str, Dict[str, str]] = field(default_factory=dict)
    versions: Dict[str, str] = field(default_factory=dict)

    @property
    def failures(self) -> List[str]:
        return [f"seed {r.seed} {r.arm}:{r.name}: {r.failure}" for r in self.results if r.failure]

    @property
    def failed(self) -> bool:
        return bool(self.failures)

    def to_frame(self) -> pd.DataFrame:
        """One row per (seed, arm), curves excluded."""
        rows = []
        for r in self.results:
            row = r.to_dict()
            row.pop('val_curve')
            row.pop('train_curve')
            row.pop('detection')
            row['shape'] = shape_label(r.shape)
            rows.append(row)
        return pd.DataFrame(rows)

    def summary(self) -> pd.DataFrame:
        """
        Medians per arm over seeds; IQR columns only with more than one seed.
        """
        metrics = ['epochs_to_converge', 'time_to_converge', 'accuracy', 'fpr', 'final_val_rmse',
                   'compute_to_converge', 'compute_total', 'bytes_exchanged', 'cost_per_epoch']
        rows = []
        keys = list(dict.fromkeys((r.arm, r.name) for r in self.results))
        for arm, name in keys:
            group = [r for r in self.results if (r.arm, r.name) == (arm, name) and not r.failure]
            row = {'arm': arm, 'name': name, 'runs': len(group),
                   'converged': sum(r.converged for r in group)}
            for metric in metrics:
                values = [getattr(r, metric) for r in group]
                row[f'{metric}_median'] = _median(values)
                if len(self.seeds) > 1:
                    row[f'{metric}_iqr'] = _iqr(values)
            rows.append(row)
        return pd.DataFrame(rows)

    def improvements(self) -> pd.DataFrame:
        """
        Relative improvement of every plan over its matched fresh model and vs FL.

        When FedAvg never converged its compute over all rounds run stands
        in as a lower bound (``fl_converged`` counts the seeds that did).
        """
        summary = self.summary()
        if summary.empty:
            return pd.DataFrame()
        indexed = summary.set_index(['arm', 'name'])
        fl = indexed.loc[('fl', 'fedavg')] if ('fl', 'fedavg') in indexed.index else None
        fl_compute = None
        if fl is not None:
            fl_compute = fl['compute_to_converge_median']
            if fl_compute is None or not np.isfinite(fl_compute):
                fl_compute = fl['compute_total_median']
        rows = []
        for r_name in summary.loc[summary['arm'] == 'synthesized', 'name']:
            synth = indexed.loc[('synthesized', r_name)]
            matched = next((r.matched_fresh for r in self.results
                            if r.arm == 'synthesized' and r.name == r_name and r.matched_fresh), None)
            fresh = indexed.loc[('fresh_central', matched)] if ('fresh_central', matched) in indexed.index else None
            row = {
                'plan': r_name,
                'matched_fresh': matched,
                'synth_epochs': synth['epochs_to_converge_median'],
                'fresh_epochs': None if fresh is None else fresh['epochs_to_converge_median'],
                'epoch_improvement': None if fresh is None else _relative_improvement(
                    fresh['epochs_to_converge_median'], synth['epochs_to_converge_median']),
                'time_improvement': None if fresh is None else _relative_improvement(
                    fresh['time_to_converge_median'], synth['time_to_converge_median']),
                'sls_compute': synth['compute_to_converge_median'],
                'fl_compute': fl_compute,
                'fl_converged': None if fl is None else int(fl['converged']),
                'sls_bytes': synth['bytes_exchanged_median'],
                'fl_bytes': None if fl is None else fl['bytes_exchanged_median'],
            }
            row['compute_improvement_vs_fl'] = _relative_improvement(row['fl_compute'], row['sls_compute'])
            rows.append(row)
        return pd.DataFrame(rows)

    def detection(self) -> pd.DataFrame:
        """
        Detection per arm pooled over seeds.

        Confusion counts are summed (micro average, ``*_micro`` columns and
        the count columns); ``*_macro`` columns are the mean of per-seed
        metrics.
        """
        rows = []
        for arm, name in dict.fromkeys((r.arm, r.name) for r in self.results):
            reports = [DetectionReport.from_dict(r.detection) for r in self.results
                       if (r.arm, r.name) == (arm, name) and r.detection and not r.failure]
            if not reports:
                continue
            pooled, macro = micro_average(reports), macro_average(reports)
            row = {'arm': arm, 'name': name, 'runs': len(reports), **pooled.table_row()}
            for metric in ('accuracy', 'precision', 'tpr', 'fpr'):
                row[f'{metric}_micro'] = getattr(pooled, metric)
                row[f'{metric}_macro'] = macro[metric]
            rows.append(row)
        return pd.DataFrame(rows)

    def plotdata(self) -> pd.DataFrame:
        """Long-format per-epoch (or per-round) curves of every arm and seed."""
        frames = []
        for r in self.results:
            if not r.val_curve:
                continue
            frames.append(pd.DataFrame({
                'seed': r.seed, 'arm': r.arm, 'name': r.name,
                'epoch': np.arange(1, len(r.val_curve) + 1),
                'val_rmse': r.val_curve,
                'train_rmse': r.train_curve,
            }))
        if not frames:
            return pd.DataFrame(columns=['seed', 'arm', 'name', 'epoch', 'val_rmse', 'train_rmse'])
        return pd.concat(frames, ignore_index=True)

    def to_dict(self, deterministic: bool = False) -> Dict[str, Any]:
        return {
            'seeds': list(self.seeds),
            'criterion': self.criterion,
            'config': self.config,
            'hashes': self.hashes,
            'versions': self.versions,
            'failures': self.failures,
            'results': [r.to_dict(deterministic) for r in self.results],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ComparisonReport':
        return cls(
            results=[ArmResult.from_dict(r) for r in data.get('results', [])],
            seeds=[int(s) for s in data.get('seeds', [])],
            criterion=data.get('criterion', {}),
            config=data.get('config', {}),
            hashes=data.get('hashes', {}),
            versions=data.get('versions', {}),
        )


def load_dataset(cfg: ExperimentConfig) -> Optional[Dataset]:
    if cfg.source != 'csv':
        return None
    schema = FlowSchema.from_yaml(cfg.schema) if cfg.schema else FlowSchema.from_header(cfg.path)
    return ingest_csv(cfg.path, schema)


def run_comparison(cfg: ExperimentConfig) -> ComparisonReport:
    """
    Run every arm for every seed and collect the results.

    Seeds run serially unless ``parallel_seeds``; results are identical
    either way and ordered by seed.

    Args:
        cfg: Experiment description

    Returns:
        ComparisonReport (check ``failed`` for arms that could not run)
    """
    cfg.validate()
    logger.info("=" * 60)
    logger.info(f"Comparison over seeds {cfg.seeds}: arms {list(cfg.arms)}, "
                f"plans {[p.get('name') for p in cfg.plans]}")
    logger.info("=" * 60)

    dataset = load_dataset(cfg)
    if cfg.parallel_seeds and len(cfg.seeds) > 1:
        with ThreadPoolExecutor(max_workers=len(cfg.seeds)) as pool:
            outcomes = list(pool.map(lambda s: run_seed(cfg, s, dataset), cfg.seeds))
    else:
        outcomes = [run_seed(cfg, s, dataset)
                    for s in tqdm(cfg.seeds, desc="Seeds", disable=not cfg.training.progress)]

    results = [r for seed_results, _ in outcomes for r in seed_results]
    hashes = {str(seed): h for seed, (_, h) in zip(cfg.seeds, outcomes)}
    report = ComparisonReport(results=results, seeds=list(cfg.seeds), criterion=cfg.criterion.to_dict(),
                              config=cfg.to_dict(), hashes=hashes, versions=package_versions())
    for failure in report.failures:
        logger.warning(failure)
    logger.info(f"Comparison finished: {len(results)} arm runs, {len(report.failures)} failures")
    return report
