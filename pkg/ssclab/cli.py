"""Command line entry point.

Subcommands print their results to stdout as ``key=value`` lines (tables for ``eval``)
and log to stderr. Exit status is 0 on success, 1 when a verification fails and 2 on
invalid input or usage.
"""
import argparse
import os
import sys
import numpy as np
from . import __version__
from . import config as sscconfig
from . import dataset
from . import distill
from . import gradcheck
from . import io as sscio
from . import labels
from . import log
from . import metrics
from . import net
from . import parallel
from . import progress
from . import synthgen
from . import voxel
from .exception import ArgumentError, ErrorCode, InputNotFoundError, SSCError

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2


class _Parser(argparse.ArgumentParser):
    """Raises instead of exiting so that usage errors share the exit code of input errors"""
    def error(self, message):
        raise ArgumentError(message)


def _add_common(p):
    p.add_argument('--config', help='Configuration file (key = value)')
    p.add_argument('--dataset', choices=['semantickitti', 'semanticposs', 'custom'])
    p.add_argument('--seed', type=int)
    p.add_argument('--threads', type=int)
    p.add_argument('--epsilon', type=float)
    p.add_argument('--verbose', action='store_true', help='Log debug messages')
    p.add_argument('--progress', action='store_true', help='Show progress bars on stderr')


def make_parser():
    parser = _Parser(prog='ssclab', description='LiDAR semantic scene completion toolkit')
    parser.add_argument('--version', action='version', version='ssclab ' + __version__)
    sub = parser.add_subparsers(dest='command', parser_class=_Parser)
    sub.required = True

    p = sub.add_parser('aggregate', help='Build completion labels from consecutive frames')
    _add_common(p)
    p.add_argument('--sequence', help='Directory with velodyne/, labels/ and poses.txt')
    p.add_argument('--start', type=int, default=0)
    p.add_argument('--count', type=int, default=1)
    p.add_argument('--raw-labels', action='store_true', help='Map raw label ids with the dataset learning map')
    p.add_argument('--out', required=True)

    p = sub.add_parser('rectify', help='Remove moving-object traces from completion labels')
    _add_common(p)
    p.add_argument('--grid', required=True)
    p.add_argument('--scan', required=True)
    p.add_argument('--labels', required=True)
    p.add_argument('--raw-labels', action='store_true')
    p.add_argument('--out', required=True)

    p = sub.add_parser('eval', help='IoU, mIoU and completion IoU over a directory of grids')
    _add_common(p)
    p.add_argument('--pred-dir', required=True)
    p.add_argument('--gt-dir', required=True)

    p = sub.add_parser('dskd', help='Distillation loss between two sparse tensors')
    _add_common(p)
    p.add_argument('--student', required=True)
    p.add_argument('--teacher', required=True)
    p.add_argument('--max-voxels', type=int)

    p = sub.add_parser('gradcheck', help='Finite-difference checks of the loss gradients')
    _add_common(p)
    p.add_argument('--instances', type=int, default=100)
    p.add_argument('--tolerance', type=float, default=1e-4)

    p = sub.add_parser('demo', help='Completion forward pass on a synthetic scene')
    _add_common(p)
    p.add_argument('--script', help='Scene script (default: built-in scene)')
    p.add_argument('--frames', type=int, default=3)
    p.add_argument('--channels', type=int, default=4)
    p.add_argument('--weights', help='Network weights (default: seeded initialization)')
    p.add_argument('--method', choices=['dense', 'sparse'], default='dense')
    p.add_argument('--empty', action='store_true', help='Use a scene without objects')
    p.add_argument('--out', help='Also write the summary to this file')
    return parser


def load_run_config(args):
    """Config file keys overridden by command line flags"""
    prop = sscconfig.load_config(args.config) if args.config else {}
    for key in ('dataset', 'seed', 'threads', 'epsilon'):
        value = getattr(args, key)
        if value is not None:
            prop[key] = value
    if getattr(args, 'max_voxels', None) is not None:
        prop['distill.max_voxels'] = args.max_voxels
    return sscconfig.RunConfig.from_prop(prop)


def _learning_map(cfg):
    if cfg.dataset == 'custom':
        raise ArgumentError('--raw-labels needs a dataset preset with a learning map')
    return dataset.preset(cfg.dataset).learning_map


def _read_frame_labels(path, cfg, raw):
    lab = sscio.read_labels(path)
    if raw:
        lab = sscio.FrameLabels(voxel.remap_labels(lab.semantic, _learning_map(cfg), cfg.grid.ignore_label),
                                lab.instance)
    return lab


def _emit(lines, out=None):
    text = '\n'.join(lines) + '\n'
    sys.stdout.write(text)
    if out is not None:
        with open(out, 'w') as f:
            f.write(text)


# ------------------------------------------------------------------------------------------------
# Commands

def cmd_aggregate(args, cfg):
    seq = args.sequence or cfg.paths.get('sequence')
    if seq is None:
        raise ArgumentError('aggregate needs --sequence or paths.sequence')
    poses = sscio.read_poses(os.path.join(seq, 'poses.txt'))
    transforms = sscio.relative_transforms(poses, args.start, args.count)
    frames = []
    for t in range(args.start, args.start + args.count):
        pc = sscio.read_point_cloud(os.path.join(seq, 'velodyne', '{:06d}.bin'.format(t)))
        lab = _read_frame_labels(os.path.join(seq, 'labels', '{:06d}.label'.format(t)), cfg, args.raw_labels)
        frames.append((pc, lab.semantic))
    grid = labels.aggregate_completion_labels(frames, transforms, cfg.grid)
    sscio.write_voxel_grid(grid, args.out)
    _emit(['frames={}'.format(args.count), 'occupied_voxels={}'.format(grid.occupied_count())])
    return EXIT_OK


def cmd_rectify(args, cfg):
    grid = sscio.read_voxel_grid(args.grid, cfg.grid)
    pc = sscio.read_point_cloud(args.scan)
    lab = _read_frame_labels(args.labels, cfg, args.raw_labels)
    masks = labels.removal_masks(grid, pc, lab, cfg.rectify, cfg.grid)
    rectified = labels.apply_removal(grid, masks, cfg.rectify)
    sscio.write_voxel_grid(rectified, args.out)
    lines = []
    for c, mask in masks.items():
        name = cfg.class_names[c - 1] if c - 1 < len(cfg.class_names) else str(c)
        lines.append('removed.{}={}'.format(name, int(np.count_nonzero(mask))))
    lines.append('removed={}'.format(sum(int(np.count_nonzero(m)) for m in masks.values())))
    _emit(lines)
    return EXIT_OK


def _grid_pairs(pred_dir, gt_dir):
    for d in (pred_dir, gt_dir):
        if not os.path.isdir(d):
            raise InputNotFoundError(d)
    names = sorted(n for n in os.listdir(gt_dir)
                   if os.path.isfile(os.path.join(gt_dir, n)) and os.path.isfile(os.path.join(pred_dir, n)))
    if not names:
        raise ArgumentError('No matching file pairs in {} and {}'.format(pred_dir, gt_dir))
    return [(os.path.join(pred_dir, n), os.path.join(gt_dir, n)) for n in names]


def cmd_eval(args, cfg):
    pairs = _grid_pairs(args.pred_dir, args.gt_dir)
    log.info('Evaluating {} grid pairs'.format(len(pairs)))

    def process(i):
        pred_path, gt_path = pairs[i]
        pred = sscio.read_voxel_grid(pred_path, cfg.grid)
        gt = sscio.read_voxel_grid(gt_path, cfg.grid)
        progress.update(i + 1)
        return metrics.accumulate(pred, gt), metrics.binary_confusion(pred, gt)

    progress.start(progress.ProgressMode.Samples, len(pairs))
    results = parallel.foreach(range(len(pairs)), process)
    progress.end()
    cm = metrics.ConfusionMatrix.zeros(cfg.grid.num_classes)
    occupancy = metrics.ConfusionMatrix.zeros(2)
    for a, b in results:
        cm = cm.merge(a)
        occupancy = occupancy.merge(b)
    completion = metrics.occupancy_iou(occupancy)
    df = metrics.report(cm, cfg.class_names, completion, cfg.grid.empty_label,
                        cfg.absent_as_zero, cfg.include_empty)
    _emit(['pairs={}'.format(len(pairs)), metrics.format_report(df)])
    return EXIT_OK


def cmd_dskd(args, cfg):
    student = sscio.read_sparse_tensor(args.student)
    teacher = sscio.read_sparse_tensor(args.teacher)
    result = distill.dskd(student, teacher, cfg.max_voxels, cfg.seed)
    _emit(['loss={:.9g}'.format(result.loss),
           'num_student={}'.format(result.num_student),
           'num_matched={}'.format(result.num_matched),
           'matched_fraction={:.6f}'.format(result.matched_fraction)])
    return EXIT_OK


def cmd_gradcheck(args, cfg):
    if args.instances < 1:
        raise ArgumentError('--instances must be >= 1')
    results = gradcheck.run_all(cfg.seed, args.instances, args.tolerance)
    lines = ['{} worst_error={:.3e} {}'.format(r.name, r.worst_error, 'PASS' if r.passed else 'FAIL')
             for r in results]
    failed = [r for r in results if not r.passed]
    if failed:
        worst = max(failed, key=lambda r: r.worst_error)
        lines.append('FAILED {} worst_error={:.3e} tolerance={:.1e}'.format(worst.name, worst.worst_error, worst.tolerance))
    _emit(lines)
    return EXIT_VERIFY if failed else EXIT_OK


def occupancy_features(grid, channels):
    """Occupancy in channel 0 and a class one-hot folded into the remaining channels"""
    if channels < 1:
        raise ArgumentError('--channels must be >= 1')
    volume = np.zeros(grid.spec.dims + (channels,))
    occupied = grid.occupied_mask()
    volume[..., 0][occupied] = 1.0
    if channels > 1:
        idx = np.argwhere(occupied)
        cls = grid.labels[occupied].astype(np.int64)
        volume[idx[:, 0], idx[:, 1], idx[:, 2], 1 + (cls - 1) % (channels - 1)] = 1.0
    return volume


def cmd_demo(args, cfg):
    spec = synthgen.demo_spec()
    if args.empty:
        script = synthgen.SceneScript((), frame_count=args.frames, seed=cfg.seed)
    elif args.script:
        if not os.path.isfile(args.script):
            raise InputNotFoundError(args.script)
        with open(args.script) as f:
            script = synthgen.parse_script(f.read())
    else:
        script = synthgen.default_script(cfg.seed, args.frames)
    scene = synthgen.generate(script, spec)
    grid = labels.aggregate_completion_labels(
        [(pc, lab.semantic) for pc, lab in scene.frames], scene.transforms(), spec)
    pc0, lab0 = scene.frames[0]
    rectified = labels.rectify(grid, pc0, lab0, cfg.rectify, spec)

    params = net.load_params(args.weights) if args.weights else net.init_completion_params(args.channels, cfg.seed)
    volume = occupancy_features(rectified, params.channels)
    out = net.completion_forward(volume, params, args.method)
    before = voxel.sparsify(volume, cfg.epsilon)
    after = voxel.sparsify(out, cfg.epsilon)
    radius = net.receptive_radius(params)
    support = voxel.dilate_support(np.any(volume != 0, axis=-1), radius)
    after_mask = np.zeros(spec.dims, dtype=bool)
    after_mask[tuple(after.indices.T)] = True
    _emit([
        'voxels={}'.format(spec.num_voxels),
        'moving_voxels={}'.format(labels.moving_voxel_count(grid, cfg.rectify)),
        'moving_voxels_rectified={}'.format(labels.moving_voxel_count(rectified, cfg.rectify)),
        'occupied_before={}'.format(len(before)),
        'occupied_after={}'.format(len(after)),
        'receptive_radius={}'.format(radius),
        'within_receptive_field={}'.format('true' if not np.any(after_mask & ~support) else 'false'),
    ], args.out)
    return EXIT_OK


COMMANDS = {
    'aggregate': cmd_aggregate,
    'rectify': cmd_rectify,
    'eval': cmd_eval,
    'dskd': cmd_dskd,
    'gradcheck': cmd_gradcheck,
    'demo': cmd_demo,
}


def main(argv=None):
    try:
        args = make_parser().parse_args(argv)
        log.init('logger::default', {
            'stream': 'stderr',
            'color': sys.stderr.isatty(),
            'min_level': log.LogLevel.Debug if args.verbose else log.LogLevel.Info})
        cfg = load_run_config(args)
        progress.init('progress::default' if args.progress else 'progress::null')
        parallel.init('parallel::default', {'num_threads': cfg.threads})
        return COMMANDS[args.command](args, cfg)
    except SSCError as e:
        print('error: {}'.format(e), file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print('error: [{}] {} [path=\'{}\']'.format(ErrorCode.IO.value, e.strerror or e, e.filename), file=sys.stderr)
        return EXIT_USAGE
    finally:
        parallel.shutdown()
        progress.shutdown()
        log.shutdown()
