"""
Command line for the synthesized learning pipeline.

    python -m src.cli <subcommand> [--config config/config.yaml] [--seed N] ...

Every subcommand reads the YAML config and lets flags override it. Exit
codes: 0 success, 1 user error (bad flags, missing files, SLSError), 2
internal error.
"""
import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from src.analytics.layer_stats import compute_layer_stats
from src.analytics.ranking import contribution_score, rank_layers
from src.analytics.selection import SelectionMask, select_layers
from src.bench.experiment import ExperimentConfig, load_dataset, prepare_partition, run_comparison
from src.bench.report import PLOTDATA_CSV, SUMMARY_CSV, emit_report
from src.data.dataset import Dataset, EdgePartition
from src.data.synthetic import SynthConfig, generate_synthetic, save_dataset
from src.detection.detector import calibrate, classify, parse_method, reports_frame, score
from src.edge.trainer import load_edge_models, save_edge_models, train_edges
from src.federated.config import FLConfig
from src.federated.fedavg import FLTrace, fl_run
from src.nn.config import ACTIVATIONS, TrainConfig
from src.nn.gradcheck import check_gradients
from src.nn.network import autoencoder_shape, init_network
from src.nn.serialization import load_network, save_network
from src.nn.training import TrainTrace
from src.synthesis.plan import INPUT_INITS, SynthesisPlan
from src.synthesis.synthesizer import (
    REFERENCE_PARAMS,
    SynthesizedModel,
    describe,
    fine_tune,
    synthesize,
    verify_provenance,
)
from src.utils.errors import SLSError, StaleCacheError, SynthesisError
from src.utils.helpers import load_config, load_json, save_json, setup_logging
from src.viz.plots import plot_convergence_bars, plot_fl_rounds, plot_layer_sums, plot_loss_curves, plot_ratios

logger = logging.getLogger('src.cli')

DEFAULT_CONFIG = "config/config.yaml"
PARTITION_RECORD = 'partition.json'
GRADCHECK_TOLERANCE = 1e-5


class UsageError(SLSError):
    """Bad or missing command-line input."""


class CLIParser(argparse.ArgumentParser):
    """ArgumentParser that exits with status 1 on usage errors."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> List[int]:
    return [int(v) for v in text.split(',') if v.strip()]


def _seeds(text: str) -> List[int]:
    """``10`` means seeds 0..9, ``3,7,11`` lists them."""
    return _int_list(text) if ',' in text else list(range(int(text)))


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--config', default=DEFAULT_CONFIG, help="YAML config file")
    parser.add_argument('--seed', type=int, default=None, help="Master seed (overrides the config)")
    parser.add_argument('--progress', action='store_true', help="Show progress bars")


def _data_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--data', help="Dataset CSV (default: synthetic data from the config)")
    parser.add_argument('--schema', help="YAML schema for --data (default: every column but 'label')")


def build_parser() -> CLIParser:
    parser = CLIParser(prog='sls', description="Synthesized learning: edge autoencoders, layer "
                                               "analysis, synthesis, detection and FedAvg")
    sub = parser.add_subparsers(dest='command', required=True, parser_class=CLIParser)

    p = sub.add_parser('gen-data', help="Generate a synthetic flow-metadata CSV")
    _common(p)
    p.add_argument('--out', default=None, help="Output CSV (default <paths.data>/synthetic.csv)")
    p.add_argument('--n-normal', type=int)
    p.add_argument('--n-attack', type=int)
    p.add_argument('--dim', type=int)
    p.add_argument('--attack-shift', type=float)

    p = sub.add_parser('train-edges', help="Train one autoencoder per edge block")
    _common(p)
    _data_flags(p)
    p.add_argument('--m', type=int)
    p.add_argument('--s-train', type=int)
    p.add_argument('--s-test', type=int)
    p.add_argument('--hidden', type=_int_list, help="Hidden widths, e.g. 60,60,60,60")
    p.add_argument('--epochs', type=int)
    p.add_argument('--lr', type=float)
    p.add_argument('--jitter', type=float)
    p.add_argument('--parallel', action='store_true')
    p.add_argument('--out', default=None, help="Output directory (default <paths.output>/edges)")

    p = sub.add_parser('analyze', help="Layer weight sums, ratios, scores and selection")
    _common(p)
    p.add_argument('--edges', help="Directory written by train-edges")
    p.add_argument('--model', help="Single model file (with --trace)")
    p.add_argument('--trace', help="Training trace CSV of --model")
    p.add_argument('--variant', choices=('l1', 'signed'))
    p.add_argument('--rule', choices=('endpoint_delta', 'total_variation'))
    p.add_argument('--policy', help="Selection policy, e.g. top_k_per_model:3 (requires --edges)")
    p.add_argument('--out', default=None, help="Output directory (default <paths.output>/analysis)")

    p = sub.add_parser('synthesize', help="Build a central model from edge layers")
    _common(p)
    p.add_argument('--edges', required=True)
    p.add_argument('--mask', help="Selection mask JSON (from analyze)")
    p.add_argument('--policy', help="Selection policy when no --mask is given")
    p.add_argument('--strategy', choices=('stack', 'widen'), default='stack')
    p.add_argument('--glue-init', choices=('uniform_pm1', 'uniform_scaled', 'near_zero'))
    p.add_argument('--cross-scale', type=float)
    p.add_argument('--head', type=_int_list, help="Fresh output-head widths")
    p.add_argument('--no-input-layer', action='store_true')
    p.add_argument('--input-init', choices=INPUT_INITS)
    p.add_argument('--no-decoders', action='store_true', help="Close with fresh layers instead of edge decoders")
    p.add_argument('--reference', choices=sorted(REFERENCE_PARAMS), default='synthesized',
                   help="Reference parameter count to report against")
    p.add_argument('--name', default='plan')
    p.add_argument('--out', default=None, help="Output directory (default <paths.output>/synth)")

    p = sub.add_parser('fine-tune', help="Fine-tune a synthesized model on central data")
    _common(p)
    p.add_argument('--model', required=True, help="Synthesized model file")
    p.add_argument('--edges', required=True, help="Edge directory (supplies the partition record)")
    p.add_argument('--epochs', type=int)
    p.add_argument('--lr', type=float)
    p.add_argument('--out', default=None, help="Output directory (default <paths.output>/fine_tune)")

    p = sub.add_parser('detect', help="Calibrate a threshold and classify held-out central rows")
    _common(p)
    p.add_argument('--model', required=True)
    p.add_argument('--edges', required=True, help="Edge directory (supplies the partition record)")
    p.add_argument('--method', help="percentile:0.99 | max_normal | roc_opt")
    p.add_argument('--out', default=None, help="Report JSON (default <paths.output>/detection.json)")

    p = sub.add_parser('fl', help="Run the FedAvg baseline")
    _common(p)
    _data_flags(p)
    p.add_argument('--clients', type=int)
    p.add_argument('--rounds', type=int)
    p.add_argument('--local-epochs', type=int)
    p.add_argument('--edge-lr', type=float)
    p.add_argument('--central-lr', type=float)
    p.add_argument('--preset', choices=('fl3', 'fl8', 'fl12'))
    p.add_argument('--hidden', type=_int_list)
    p.add_argument('--parallel', action='store_true')
    p.add_argument('--out', default=None, help="Output directory (default <paths.output>/fl)")

    p = sub.add_parser('compare', help="Paired synthesized vs fresh central vs FedAvg runs")
    _common(p)
    _data_flags(p)
    p.add_argument('--seeds', type=_seeds, help="Seed count (10) or list (1,2,3)")
    p.add_argument('--plan', action='append', help="Plan name from the config, or a policy spec")
    p.add_argument('--arms', help="Comma list of fresh_central,synthesized,fl")
    p.add_argument('--parallel', action='store_true', help="Run seeds in parallel")
    p.add_argument('--formats', default='json,csv,plotdata')
    p.add_argument('--out', default=None, help="Report directory (default <paths.output>/compare)")

    p = sub.add_parser('report', help="Render figures from a compare report directory")
    _common(p)
    p.add_argument('--input', required=True, help="Directory written by compare")
    p.add_argument('--out', default=None, help="Figure directory (default <input>/figures)")
    p.add_argument('--edges', help="Edge model directory; adds layer weight-sum and ratio figures")
    p.add_argument('--fl', help="Directory written by the fl subcommand; adds the per-round figure")

    p = sub.add_parser('gradcheck', help="Finite-difference check of backpropagation")
    _common(p)
    p.add_argument('--nets', type=int, default=20)
    p.add_argument('--max-width', type=int, default=16)
    p.add_argument('--tolerance', type=float, default=GRADCHECK_TOLERANCE)
    return parser


def _output(args: argparse.Namespace, config: Dict[str, Any], default_name: str) -> Path:
    if args.out:
        return Path(args.out)
    return Path((config.get('paths') or {}).get('output', 'runs')) / default_name


def _training(config: Dict[str, Any], args: argparse.Namespace, section: str = 'training') -> TrainConfig:
    base = dict(config.get('training') or {})
    if section != 'training':
        base.update(config.get(section) or {})
    return TrainConfig.from_dict(
        base,
        seed=args.seed,
        epochs=getattr(args, 'epochs', None),
        learning_rate=getattr(args, 'lr', None),
        progress=args.progress or None,
    ).validate()


def _experiment(config: Dict[str, Any], args: argparse.Namespace, **overrides: Any) -> ExperimentConfig:
    """ExperimentConfig from the YAML config with data, edge and seed flags applied."""
    overrides = {k: v for k, v in overrides.items() if v is not None}
    for flag, name in (('m', 'm'), ('s_train', 's_train'), ('s_test', 's_test'),
                       ('hidden', 'edge_hidden'), ('jitter', 'jitter')):
        if getattr(args, flag, None) is not None:
            overrides[name] = getattr(args, flag)
    overrides.setdefault('training', _training(config, args))
    if args.seed is not None:
        overrides.setdefault('seeds', [args.seed])
    cfg = ExperimentConfig.from_config(config, **overrides)
    if getattr(args, 'data', None):
        cfg = replace(cfg, source='csv', path=args.data, schema=args.schema)
    return cfg


def _load_dataset(cfg: ExperimentConfig) -> Optional[Dataset]:
    if cfg.source != 'csv':
        return None
    if not Path(cfg.path).exists():
        raise UsageError(f"Data file not found: {cfg.path}")
    return load_dataset(cfg)


def _partition(cfg: ExperimentConfig, seed: int) -> EdgePartition:
    return prepare_partition(cfg, seed, _load_dataset(cfg))


def _partition_record(cfg: ExperimentConfig, seed: int, partition: EdgePartition) -> Dict[str, Any]:
    return {
        'seed': seed,
        'source': cfg.source,
        'path': cfg.path,
        'schema': cfg.schema,
        'm': cfg.m,
        's_train': cfg.s_train,
        's_test': cfg.s_test,
        'jitter': cfg.jitter,
        'normalization': cfg.normalization,
        'train_normal_only': cfg.train_normal_only,
        'synthetic': cfg.synthetic.to_dict(),
        'central_train': partition.central.train.content_hash(),
        'central_test': partition.central.test.content_hash(),
    }


def _restore_partition(edges_dir: str) -> tuple:
    """Rebuild the partition train-edges used and check it still hashes the same."""
    path = Path(edges_dir) / PARTITION_RECORD
    if not path.exists():
        raise UsageError(f"Partition record not found: {path}")
    record = load_json(str(path))
    cfg = ExperimentConfig(
        seeds=[record['seed']], source=record['source'], path=record['path'], schema=record['schema'],
        normalization=record['normalization'], train_normal_only=record['train_normal_only'],
        synthetic=SynthConfig.from_dict(record['synthetic']), m=record['m'], s_train=record['s_train'],
        s_test=record['s_test'], jitter=record['jitter'],
    )
    partition = _partition(cfg, record['seed'])
    if partition.central.train.content_hash() != record['central_train'] or \
            partition.central.test.content_hash() != record['central_test']:
        raise StaleCacheError(f"Data behind {path} changed since the edges were trained")
    return cfg, partition


def cmd_gen_data(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    synth = SynthConfig.from_dict(config.get('synthetic'), seed=args.seed, n_normal=args.n_normal,
                                  n_attack=args.n_attack, dim=args.dim, attack_shift=args.attack_shift)
    out = Path(args.out) if args.out else Path((config.get('paths') or {}).get('data', 'data')) / 'synthetic.csv'
    save_dataset(generate_synthetic(synth), str(out))
    print(out)
    return 0


def cmd_train_edges(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    cfg = _experiment(config, args, parallel_edges=args.parallel or None)
    seed = cfg.training.seed
    partition = _partition(cfg, seed)
    shape = autoencoder_shape(partition.edges[0].train.n_features, cfg.edge_hidden)
    edges = train_edges(partition, shape, cfg.training, parallel=cfg.parallel_edges,
                        train_normal_only=cfg.train_normal_only)
    out = _output(args, config, 'edges')
    save_edge_models(edges, str(out))
    save_json(_partition_record(cfg, seed, partition), str(out / PARTITION_RECORD))
    edges.summary().to_csv(out / 'summary.csv', index=False)
    print(edges.summary().to_string(index=False))
    return 0


def cmd_analyze(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    analysis = config.get('analysis') or {}
    variant = args.variant or analysis.get('variant', 'l1')
    rule = args.rule or analysis.get('rule', 'endpoint_delta')
    out = _output(args, config, 'analysis')
    out.mkdir(parents=True, exist_ok=True)

    if args.edges:
        edges = load_edge_models(args.edges)
        pairs = list(zip(edges.models, edges.traces))
    elif args.model and args.trace:
        net, _ = load_network(args.model)
        pairs = [(net, TrainTrace.load_csv(args.trace, shape=net.shape))]
    else:
        raise UsageError("analyze needs --edges or both --model and --trace")

    stats = [compute_layer_stats(trace, k, n_hidden=net.depth - 1)
             for k, (net, trace) in enumerate(pairs, start=1)]
    scores = [contribution_score(s, variant, rule) for s in stats]
    pd.concat([s.to_frame() for s in stats], ignore_index=True).to_csv(
        out / 'layer_stats.csv', index=False, float_format='%.17g')
    ranking = rank_layers(scores)
    ranking.to_csv(out / 'ranking.csv', index=False)
    save_json({'scores': [s.to_dict() for s in scores]}, str(out / 'scores.json'))
    for s in stats:
        if s.undefined_alpha_epochs or s.undefined_beta_epochs:
            logger.warning(f"Model {s.model_id}: undefined alpha epochs {s.undefined_alpha_epochs}, "
                           f"beta epochs {s.undefined_beta_epochs}")

    policy = args.policy or (analysis.get('policy') if args.edges else None)
    if policy:
        if not args.edges:
            raise UsageError("--policy needs --edges")
        select_layers(scores, policy).save(str(out / 'mask.json'))
    print(ranking.to_string(index=False))
    return 0


def cmd_synthesize(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    edges = load_edge_models(args.edges)
    if args.mask:
        mask = SelectionMask.load(args.mask)
    else:
        analysis = config.get('analysis') or {}
        stats = [compute_layer_stats(trace, k, n_hidden=net.depth - 1)
                 for k, (net, trace) in enumerate(zip(edges.models, edges.traces), start=1)]
        scores = [contribution_score(s, analysis.get('variant', 'l1'), analysis.get('rule', 'endpoint_delta'))
                  for s in stats]
        mask = select_layers(scores, args.policy or analysis.get('policy', 'all'))

    options = {k: v for k, v in {
        'glue_init': args.glue_init,
        'cross_scale': args.cross_scale,
        'output_head': args.head,
        'input_layer': False if args.no_input_layer else None,
        'input_init': args.input_init,
        'reuse_decoders': False if args.no_decoders else None,
    }.items() if v is not None}
    plan = SynthesisPlan.from_mask(mask, args.strategy, name=args.name, **options)
    training = _training(config, args, 'fine_tune')
    model = synthesize(edges, plan, edges.models[0].input_dim, training)
    problems = verify_provenance(model, edges)
    if problems:
        raise SynthesisError(f"Provenance check failed: {problems}")

    out = _output(args, config, 'synth')
    description = describe(model, edges, reference_params=REFERENCE_PARAMS[args.reference])
    save_network(model.net, str(out / 'model.bin'), seed=training.seed, config=training.to_dict(),
                 extra={'plan': plan.to_dict(), 'fraction_pretrained': model.fraction_pretrained,
                        'source_hashes': {str(k): v for k, v in model.source_hashes.items()}})
    plan.save(str(out / 'plan.json'))
    save_json(description.to_dict(), str(out / 'description.json'))
    print(description.to_text())
    return 0


def _load_synthesized(path: str) -> SynthesizedModel:
    net, header = load_network(path)
    extra = header.get('extra') or {}
    if 'plan' not in extra:
        raise UsageError(f"{path} is not a synthesized model (no plan in its header)")
    return SynthesizedModel(
        net=net,
        plan=SynthesisPlan.from_dict(extra['plan']),
        fraction_pretrained=float(extra.get('fraction_pretrained', 0.0)),
        source_hashes={int(k): v for k, v in (extra.get('source_hashes') or {}).items()},
    )


def cmd_fine_tune(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    cfg, partition = _restore_partition(args.edges)
    model = _load_synthesized(args.model)
    training = _training(config, args, 'fine_tune')
    central = partition.central
    train_rows = central.train.normal_only() if cfg.train_normal_only else central.train
    val_rows = central.test.normal_only() if cfg.train_normal_only else central.test
    trace = fine_tune(model, train_rows, val_rows, training, partition)

    out = _output(args, config, 'fine_tune')
    save_network(model.net, str(out / 'model.bin'), seed=training.seed, config=training.to_dict(),
                 extra={'plan': model.plan.to_dict(), 'fraction_pretrained': model.fraction_pretrained,
                        'source_hashes': {str(k): v for k, v in model.source_hashes.items()},
                        'fine_tuned_epochs': trace.n_epochs})
    trace.save_csv(out / 'trace.csv')
    if trace.n_epochs:
        print(f"Fine-tuned {trace.n_epochs} epochs: val RMSE {trace.val_rmse[0]:.6g} -> {trace.val_rmse[-1]:.6g}")
    return 0


def cmd_detect(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    _, partition = _restore_partition(args.edges)
    net, _ = load_network(args.model)
    method = args.method or (config.get('detection') or {}).get('method', 'percentile:0.99')
    calibration, test = partition.central.train, partition.central.test
    if not test.has_labels:
        raise UsageError("Detection needs labeled data")
    if parse_method(method)['method'] == 'roc_opt':
        threshold = calibrate(score(net, calibration.features), method, calibration.labels)
    else:
        threshold = calibrate(score(net, calibration.normal_only().features), method)
    report = classify(score(net, test.features), threshold, test.labels)

    out = _output(args, config, 'detection.json')
    save_json(report.to_dict(), str(out))
    print(reports_frame([report]).to_string(index=False))
    print(f"{threshold.describe()}: accuracy {report.accuracy:.4%}, FPR {report.fpr}")
    return 0


def cmd_fl(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    fl_cfg = FLConfig.from_dict(
        config.get('federated'), seed=args.seed, clients=args.clients, rounds=args.rounds,
        local_epochs=args.local_epochs, edge_lr=args.edge_lr, central_lr=args.central_lr,
        preset=args.preset, hidden=args.hidden, parallel=args.parallel or None,
        progress=args.progress or None,
    ).validate()
    cfg = _experiment(config, args, m=fl_cfg.clients)
    partition = _partition(cfg, fl_cfg.seed)
    trace, global_net = fl_run(partition, fl_cfg, train_normal_only=cfg.train_normal_only)

    out = _output(args, config, 'fl')
    trace.save_csv(out / 'fl_trace.csv')
    save_network(global_net, str(out / 'model.bin'), seed=fl_cfg.seed, config=fl_cfg.to_dict())
    print(f"{trace.rounds} rounds: final global val loss {trace.val_loss[-1]:.6g}, "
          f"{trace.bytes_exchanged} bytes exchanged")
    return 0


def _select_plans(config: Dict[str, Any], names: Optional[Sequence[str]]) -> Optional[List[Dict[str, Any]]]:
    """Config plans named on the command line; unknown names are taken as policy specs."""
    if not names:
        return None
    configured = {p.get('name'): p for p in (config.get('synthesis') or {}).get('plans') or []}
    return [dict(configured[n]) if n in configured else {'name': n, 'policy': n} for n in names]


def cmd_compare(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    overrides = {
        'seeds': args.seeds,
        'plans': _select_plans(config, args.plan),
        'arms': tuple(a.strip() for a in args.arms.split(',')) if args.arms else None,
        'parallel_seeds': args.parallel or None,
    }
    cfg = _experiment(config, args, **overrides)
    report = run_comparison(cfg)
    out = _output(args, config, 'compare')
    inputs = {'config': str(args.config)}
    if cfg.source == 'csv':
        inputs.update(data=cfg.path, schema=cfg.schema or '')
    emit_report(report, str(out), [f.strip() for f in args.formats.split(',')], inputs=inputs)
    improvements = report.improvements()
    if not improvements.empty:
        print(improvements.to_string(index=False))
    if report.failed:
        for failure in report.failures:
            logger.error(failure)
        return 1
    return 0


def _save_figure(ax, path: Path) -> Path:
    ax.figure.savefig(path, dpi=120, bbox_inches='tight')
    plt.close(ax.figure)
    return path


def _curve_traces(group: pd.DataFrame) -> Dict[str, TrainTrace]:
    """Per-arm traces rebuilt from long-format plot data."""
    traces = {}
    for (arm, name), curve in group.groupby(['arm', 'name'], sort=False):
        traces[f"{arm}: {name}"] = TrainTrace(shape=[], train_rmse=curve['train_rmse'].tolist(),
                                               val_rmse=curve['val_rmse'].tolist())
    return traces


def cmd_report(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    plt.switch_backend('Agg')
    source = Path(args.input)
    for name in (PLOTDATA_CSV, SUMMARY_CSV):
        if not (source / name).exists():
            raise UsageError(f"{source / name} not found; run compare with formats csv,plotdata")
    out = Path(args.out) if args.out else source / 'figures'
    out.mkdir(parents=True, exist_ok=True)
    plotdata = pd.read_csv(source / PLOTDATA_CSV)
    summary = pd.read_csv(source / SUMMARY_CSV)
    written = []

    for seed, group in plotdata.groupby('seed'):
        traces = _curve_traces(group)
        ax = plot_loss_curves(list(traces.values()), list(traces), ax=plt.subplots(figsize=(10, 6))[1])
        ax.set_xlabel('Epoch / round', fontsize=12)
        ax.set_title(f'Reconstruction Loss per Arm, Seed {seed}', fontsize=14, fontweight='bold')
        written.append(_save_figure(ax, out / f'loss_seed{seed}.png'))

    for metric in ('epochs_to_converge', 'compute_to_converge', 'compute_total'):
        if f'{metric}_median' in summary and summary[f'{metric}_median'].notna().any():
            ax = plot_convergence_bars(summary, metric, ax=plt.subplots(figsize=(10, 6))[1])
            written.append(_save_figure(ax, out / f'{metric}.png'))

    if args.edges:
        analysis = config.get('analysis') or {}
        variant = analysis.get('variant', 'l1')
        edges = load_edge_models(args.edges)
        for k, (net, trace) in enumerate(zip(edges.models, edges.traces), start=1):
            stats = compute_layer_stats(trace, k, n_hidden=net.depth - 1)
            written.append(_save_figure(plot_layer_sums(stats, variant), out / f'edge{k}_sums.png'))
            for kind in ('alpha', 'beta'):
                written.append(_save_figure(plot_ratios(stats, kind, variant), out / f'edge{k}_{kind}.png'))

    if args.fl:
        fl_dir = Path(args.fl)
        if not (fl_dir / 'fl_trace.csv').exists():
            raise UsageError(f"{fl_dir / 'fl_trace.csv'} not found; run the fl subcommand first")
        shape, local_epochs, n_params = None, 0, 0
        if (fl_dir / 'model.bin').exists():
            net, header = load_network(str(fl_dir / 'model.bin'))
            shape, n_params = net.shape, net.n_params
            local_epochs = int((header.get('config') or {}).get('local_epochs', 0))
        fl_trace = FLTrace.load_csv(str(fl_dir / 'fl_trace.csv'), shape, local_epochs, n_params)
        written.append(_save_figure(plot_fl_rounds(fl_trace), out / 'fl_rounds.png'))

    logger.info(f"Wrote {len(written)} figures to {out}")
    print(out)
    return 0


def cmd_gradcheck(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    rng = np.random.default_rng(args.seed or 0)
    worst = 0.0
    for i in range(args.nets):
        depth = int(rng.integers(3, 7))
        shape = [int(w) for w in rng.integers(2, args.max_width + 1, size=depth + 1)]
        activation = ACTIVATIONS[i % len(ACTIVATIONS)]
        net = init_network(shape, activation=activation,
                           config=TrainConfig(seed=int(rng.integers(2 ** 31)), init='uniform_scaled'))
        batch = rng.normal(size=(4, shape[0]))
        targets = rng.normal(size=(4, shape[-1]))
        result = check_gradients(net, batch, targets, l2_lambda=1e-3)
        worst = max(worst, result.max_relative_error)
        logger.info(f"Net {i + 1}: shape {shape}, {activation}, max relative error {result.max_relative_error:.3g}")
    print(f"max relative error over {args.nets} nets: {worst:.3g}")
    return 0 if worst <= args.tolerance else 2


COMMANDS = {
    'gen-data': cmd_gen_data,
    'train-edges': cmd_train_edges,
    'analyze': cmd_analyze,
    'synthesize': cmd_synthesize,
    'fine-tune': cmd_fine_tune,
    'detect': cmd_detect,
    'fl': cmd_fl,
    'compare': cmd_compare,
    'report': cmd_report,
    'gradcheck': cmd_gradcheck,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    if not Path(args.config).exists():
        print(f"sls: error: config file not found: {args.config}", file=sys.stderr)
        return 1
    setup_logging(args.config, 'src')
    try:
        config = load_config(args.config)
        return COMMANDS[args.command](args, config)
    except (SLSError, FileNotFoundError) as e:
        logger.error(str(e))
        print(f"sls: error: {e}", file=sys.stderr)
        return 1
    except Exception:
        logger.exception(f"Internal error in {args.command}")
        return 2


if __name__ == '__main__':
    sys.exit(main())
