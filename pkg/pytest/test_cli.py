"""Command line tests"""
import numpy as np
import pytest
from ssclab import cli, distill, io
from ssclab.voxel import GridSpec, SparseVoxelTensor, VoxelLabelGrid

SMALL_CONFIG = '\n'.join([
    '# 16 x 16 x 8 grid of 0.2 m voxels',
    'grid.origin = 0,-1.6,-0.8',
    'grid.extent = 3.2,3.2,1.6',
    'grid.dims = 16,16,8',
    'threads = 1',
])


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / 'small.cfg'
    path.write_text(SMALL_CONFIG)
    return str(path)


@pytest.fixture
def sequence(tmp_path, synthetic_scene):
    """Synthetic scene written in the KITTI sequence layout"""
    root = tmp_path / 'seq'
    (root / 'velodyne').mkdir(parents=True)
    (root / 'labels').mkdir()
    for k, (pc, lab) in enumerate(synthetic_scene.frames):
        io.write_point_cloud(pc, str(root / 'velodyne' / '{:06d}.bin'.format(k)))
        io.write_labels(lab, str(root / 'labels' / '{:06d}.label'.format(k)))
    io.write_poses(synthetic_scene.poses, str(root / 'poses.txt'))
    return root


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def values(out):
    return dict(line.split('=', 1) for line in out.splitlines() if '=' in line and ' ' not in line)


def test_aggregate_and_rectify(capsys, tmp_path, config_path, sequence):
    grid_path = str(tmp_path / 'grid.bin')
    code, out, _ = run(capsys, 'aggregate', '--config', config_path, '--sequence', str(sequence),
                       '--count', '3', '--out', grid_path)
    assert code == cli.EXIT_OK
    assert values(out) == {'frames': '3', 'occupied_voxels': '68'}

    rect_path = str(tmp_path / 'rectified.bin')
    code, out, _ = run(capsys, 'rectify', '--config', config_path, '--grid', grid_path,
                       '--scan', str(sequence / 'velodyne' / '000000.bin'),
                       '--labels', str(sequence / 'labels' / '000000.label'), '--out', rect_path)
    assert code == cli.EXIT_OK
    v = values(out)
    assert v['removed.car'] == '8'
    assert v['removed.bicycle'] == '0'
    assert v['removed'] == '8'
    rectified = io.read_voxel_grid(rect_path)
    assert np.count_nonzero(rectified.labels == 255) == 8
    assert np.count_nonzero(rectified.labels == 1) == 12


def test_aggregate_bad_pose(capsys, config_path, sequence, tmp_path):
    (sequence / 'poses.txt').write_text('1 0 0 0 0 1 0 0 0 0 1\n')
    code, _, err = run(capsys, 'aggregate', '--config', config_path, '--sequence', str(sequence),
                       '--out', str(tmp_path / 'grid.bin'))
    assert code == cli.EXIT_USAGE
    assert 'line=1' in err


def test_rectify_missing_input(capsys, config_path, tmp_path):
    missing = str(tmp_path / 'nothing.bin')
    code, out, err = run(capsys, 'rectify', '--config', config_path, '--grid', missing,
                         '--scan', missing, '--labels', missing, '--out', str(tmp_path / 'out.bin'))
    assert code == cli.EXIT_USAGE
    assert out == ''
    assert 'error:' in err and 'nothing.bin' in err


def _write_eval_dirs(tmp_path, small_spec, rng, count=3):
    pred_dir, gt_dir = tmp_path / 'pred', tmp_path / 'gt'
    pred_dir.mkdir()
    gt_dir.mkdir()
    for i in range(count):
        gt = rng.choice([0, 0, 0, 1, 9, 13], size=small_spec.dims).astype(np.uint16)
        pred = gt.copy()
        flip = rng.random(small_spec.dims) < 0.1
        pred[flip] = rng.choice([0, 1, 9, 13], size=int(np.count_nonzero(flip)))
        io.write_voxel_grid(VoxelLabelGrid(small_spec, gt), str(gt_dir / '{:06d}.bin'.format(i)))
        io.write_voxel_grid(VoxelLabelGrid(small_spec, pred), str(pred_dir / '{:06d}.bin'.format(i)))
    return str(pred_dir), str(gt_dir)


def test_eval_perfect(capsys, tmp_path, config_path, sequence):
    grid_path = str(tmp_path / 'grid.bin')
    assert run(capsys, 'aggregate', '--config', config_path, '--sequence', str(sequence),
               '--out', grid_path)[0] == cli.EXIT_OK
    for d in ('pred', 'gt'):
        (tmp_path / d).mkdir()
        (tmp_path / d / 'a.bin').write_bytes((tmp_path / 'grid.bin').read_bytes())
    code, out, _ = run(capsys, 'eval', '--config', config_path,
                       '--pred-dir', str(tmp_path / 'pred'), '--gt-dir', str(tmp_path / 'gt'))
    assert code == cli.EXIT_OK
    assert out.splitlines()[0] == 'pairs=1'
    v = values(out)
    assert v['mIoU'] == '1.000000'
    assert v['completion'] == '1.000000'
    assert v['car'] == '1.000000'
    assert v['bicycle'] == 'nan'


def test_eval_thread_count_invariance(capsys, tmp_path, config_path, small_spec, rng):
    pred_dir, gt_dir = _write_eval_dirs(tmp_path, small_spec, rng)
    outputs = []
    for threads in ('1', '4'):
        code, out, _ = run(capsys, 'eval', '--config', config_path, '--threads', threads,
                           '--pred-dir', pred_dir, '--gt-dir', gt_dir)
        assert code == cli.EXIT_OK
        outputs.append(out)
    assert outputs[0] == outputs[1]
    assert outputs[0].startswith('pairs=3\n')


def test_eval_no_pairs(capsys, tmp_path, config_path):
    (tmp_path / 'pred').mkdir()
    (tmp_path / 'gt').mkdir()
    code, _, err = run(capsys, 'eval', '--config', config_path,
                       '--pred-dir', str(tmp_path / 'pred'), '--gt-dir', str(tmp_path / 'gt'))
    assert code == cli.EXIT_USAGE
    assert 'No matching file pairs' in err


def test_eval_missing_dir(capsys, tmp_path, config_path):
    code, _, err = run(capsys, 'eval', '--config', config_path,
                       '--pred-dir', str(tmp_path / 'p'), '--gt-dir', str(tmp_path / 'g'))
    assert code == cli.EXIT_USAGE


def _write_tensor(path, indices, features):
    io.write_sparse_tensor(SparseVoxelTensor(np.array(indices), np.array(features, dtype=np.float64), (4, 4, 4)),
                           str(path))


def test_dskd(capsys, tmp_path):
    _write_tensor(tmp_path / 's.bin', [[0, 0, 0], [0, 0, 1]], [[1, 0], [0, 1]])
    _write_tensor(tmp_path / 't.bin', [[0, 0, 0], [0, 0, 1], [3, 3, 3]], [[1, 0], [1, 0], [5, 5]])
    code, out, _ = run(capsys, 'dskd', '--student', str(tmp_path / 's.bin'), '--teacher', str(tmp_path / 't.bin'))
    assert code == cli.EXIT_OK
    assert values(out) == {'loss': '0.5', 'num_student': '2', 'num_matched': '2',
                           'matched_fraction': '1.000000'}


def test_dskd_partial(capsys, tmp_path):
    _write_tensor(tmp_path / 's.bin', [[0, 0, 0], [1, 0, 0]], [[1, 0], [0, 1]])
    _write_tensor(tmp_path / 't.bin', [[0, 0, 0]], [[1, 0]])
    code, out, _ = run(capsys, 'dskd', '--student', str(tmp_path / 's.bin'), '--teacher', str(tmp_path / 't.bin'))
    assert code == cli.EXIT_OK
    v = values(out)
    assert v['num_matched'] == '1'
    assert v['matched_fraction'] == '0.500000'
    assert v['loss'] == '0'


def test_dskd_disjoint(capsys, tmp_path):
    _write_tensor(tmp_path / 's.bin', [[0, 0, 0]], [[1, 0]])
    _write_tensor(tmp_path / 't.bin', [[1, 1, 1]], [[1, 0]])
    code, _, err = run(capsys, 'dskd', '--student', str(tmp_path / 's.bin'), '--teacher', str(tmp_path / 't.bin'))
    assert code == cli.EXIT_USAGE
    assert 'alignment' in err


def test_gradcheck(capsys):
    code, out, _ = run(capsys, 'gradcheck', '--instances', '5')
    assert code == cli.EXIT_OK
    lines = out.splitlines()
    assert [line.split()[0] for line in lines] == ['dskd', 'cross_entropy', 'lovasz_softmax']
    assert all(line.endswith('PASS') for line in lines)


def test_gradcheck_detects_wrong_gradient(capsys, monkeypatch):
    correct = distill.dskd_grad
    monkeypatch.setattr(distill, 'dskd_grad', lambda F_S, F_T: -correct(F_S, F_T))
    code, out, _ = run(capsys, 'gradcheck', '--instances', '5')
    assert code == cli.EXIT_VERIFY
    lines = out.splitlines()
    assert lines[0].startswith('dskd') and lines[0].endswith('FAIL')
    assert lines[-1].startswith('FAILED dskd')


def test_demo(capsys, tmp_path):
    out_path = tmp_path / 'summary.txt'
    code, out, _ = run(capsys, 'demo', '--out', str(out_path))
    assert code == cli.EXIT_OK
    v = values(out)
    assert v['voxels'] == '8192'
    assert v['receptive_radius'] == '8'
    assert v['within_receptive_field'] == 'true'
    assert int(v['moving_voxels']) > int(v['moving_voxels_rectified']) > 0
    assert int(v['occupied_after']) >= int(v['occupied_before']) > 0
    assert out_path.read_text() == out


def test_demo_empty(capsys):
    code, out, _ = run(capsys, 'demo', '--empty')
    assert code == cli.EXIT_OK
    v = values(out)
    assert v['occupied_before'] == '0'
    assert v['occupied_after'] == '0'
    assert v['moving_voxels'] == '0'


def test_demo_thread_count_invariance(capsys):
    outputs = [run(capsys, 'demo', '--threads', t, '--frames', '2')[1] for t in ('1', '4')]
    assert outputs[0] == outputs[1]


def test_demo_script(capsys, tmp_path):
    script = tmp_path / 'scene.txt'
    script.write_text('frame_count = 2\nobject = class:13 instance:1 position:1,0,-0.6 extent:1,1,1\n')
    code, out, _ = run(capsys, 'demo', '--script', str(script))
    assert code == cli.EXIT_OK
    assert values(out)['moving_voxels'] == '0'
    script.write_text('frame_count = 2\nshape = box\n')
    code, _, err = run(capsys, 'demo', '--script', str(script))
    assert code == cli.EXIT_USAGE
    assert 'line=2' in err


def test_usage_errors(capsys):
    assert run(capsys, 'train')[0] == cli.EXIT_USAGE
    assert run(capsys, 'eval', '--pred-dir', 'x')[0] == cli.EXIT_USAGE
    assert run(capsys, 'gradcheck', '--instances', '0')[0] == cli.EXIT_USAGE


def _write_config(tmp_path, name, *lines):
    path = tmp_path / name
    path.write_text('\n'.join((SMALL_CONFIG,) + lines) + '\n')
    return str(path)


def _aggregate(capsys, tmp_path, config_path, sequence):
    grid_path = str(tmp_path / 'grid.bin')
    assert run(capsys, 'aggregate', '--config', config_path, '--sequence', str(sequence),
               '--count', '3', '--out', grid_path)[0] == cli.EXIT_OK
    return grid_path


def _rectify_args(config_path, grid_path, sequence, out_path):
    return ('rectify', '--config', config_path, '--grid', grid_path,
            '--scan', str(sequence / 'velodyne' / '000000.bin'),
            '--labels', str(sequence / 'labels' / '000000.label'), '--out', str(out_path))


def test_rectify_without_moving_classes(capsys, tmp_path, config_path, sequence):
    grid_path = _aggregate(capsys, tmp_path, config_path, sequence)
    static = _write_config(tmp_path, 'static.cfg', 'rectify.moving_classes =')
    out_path = tmp_path / 'rectified.bin'
    code, out, _ = run(capsys, *_rectify_args(static, grid_path, sequence, out_path))
    assert code == cli.EXIT_OK
    assert out == 'removed=0\n'
    assert out_path.read_bytes() == (tmp_path / 'grid.bin').read_bytes()


def test_rectify_idempotent(capsys, tmp_path, config_path, sequence):
    grid_path = _aggregate(capsys, tmp_path, config_path, sequence)
    first, second = tmp_path / 'first.bin', tmp_path / 'second.bin'
    code, out, _ = run(capsys, *_rectify_args(config_path, grid_path, sequence, first))
    assert code == cli.EXIT_OK and values(out)['removed'] == '8'
    code, out, _ = run(capsys, *_rectify_args(config_path, str(first), sequence, second))
    assert code == cli.EXIT_OK
    assert values(out)['removed'] == '0'
    assert second.read_bytes() == first.read_bytes()


def test_rectify_dims_mismatch(capsys, tmp_path, config_path, sequence):
    grid_path = _aggregate(capsys, tmp_path, config_path, sequence)
    other = _write_config(tmp_path, 'other.cfg', 'grid.dims = 8,8,8')
    code, _, err = run(capsys, *_rectify_args(other, grid_path, sequence, tmp_path / 'out.bin'))
    assert code == cli.EXIT_USAGE
    assert 'error:' in err


def _eval_config(tmp_path):
    return _write_config(tmp_path, 'tiny.cfg', 'grid.dims = 3,1,1')


def _labels_grid(labels):
    labels = np.asarray(labels, dtype=np.uint16).reshape(-1, 1, 1)
    return VoxelLabelGrid(GridSpec().with_dims(labels.shape), labels)


def test_eval_three_voxel_example(capsys, tmp_path):
    for d, labels in (('pred', [1, 1, 2]), ('gt', [1, 2, 2])):
        (tmp_path / d).mkdir()
        io.write_voxel_grid(_labels_grid(labels), str(tmp_path / d / 'a.bin'))
    code, out, _ = run(capsys, 'eval', '--config', _eval_config(tmp_path),
                       '--pred-dir', str(tmp_path / 'pred'), '--gt-dir', str(tmp_path / 'gt'))
    assert code == cli.EXIT_OK
    v = values(out)
    assert v['mIoU'] == '0.500000'
    assert v['car'] == '0.500000' and v['bicycle'] == '0.500000'
    assert v['completion'] == '1.000000'


def test_eval_mixed_dims(capsys, tmp_path):
    for d in ('pred', 'gt'):
        (tmp_path / d).mkdir()
        io.write_voxel_grid(_labels_grid([1, 1, 2]), str(tmp_path / d / 'a.bin'))
    io.write_voxel_grid(_labels_grid([1, 2]), str(tmp_path / 'pred' / 'b.bin'))
    io.write_voxel_grid(_labels_grid([1, 2, 0]), str(tmp_path / 'gt' / 'b.bin'))
    code, _, err = run(capsys, 'eval', '--config', _eval_config(tmp_path),
                       '--pred-dir', str(tmp_path / 'pred'), '--gt-dir', str(tmp_path / 'gt'))
    assert code == cli.EXIT_USAGE
    assert 'dims' in err


def test_dskd_hand_example(capsys, tmp_path):
    _write_tensor(tmp_path / 's.bin', [[0, 0, 0], [2, 1, 3]], [[1, 0], [0, 1]])
    _write_tensor(tmp_path / 't.bin', [[0, 0, 0], [2, 1, 3]], [[1, 0], [1, 0]])
    code, out, _ = run(capsys, 'dskd', '--student', str(tmp_path / 's.bin'), '--teacher', str(tmp_path / 't.bin'))
    assert code == cli.EXIT_OK
    assert values(out)['loss'] == '0.5'


def test_pipeline_thread_count_invariance(capsys, tmp_path, config_path, sequence, rng):
    n = 16
    keys = np.sort(rng.choice(64, size=40, replace=False))
    indices = np.array(np.unravel_index(keys, (4, 4, 4))).T
    _write_tensor(tmp_path / 's.bin', indices, rng.normal(size=(40, 3)))
    _write_tensor(tmp_path / 't.bin', indices, rng.normal(size=(40, 3)))
    results = []
    for threads in ('1', '4'):
        d = tmp_path / ('threads' + threads)
        d.mkdir()
        outs = []
        outs.append(run(capsys, 'aggregate', '--config', config_path, '--threads', threads,
                        '--sequence', str(sequence), '--count', '3', '--out', str(d / 'grid.bin'))[1])
        outs.append(run(capsys, *_rectify_args(config_path, str(d / 'grid.bin'), sequence, d / 'rect.bin'),
                        '--threads', threads)[1])
        outs.append(run(capsys, 'dskd', '--threads', threads, '--max-voxels', str(n),
                        '--student', str(tmp_path / 's.bin'), '--teacher', str(tmp_path / 't.bin'))[1])
        results.append((outs, (d / 'grid.bin').read_bytes(), (d / 'rect.bin').read_bytes()))
    assert results[0] == results[1]
    assert all(out for out in results[0][0])


def test_unwritable_output(capsys, tmp_path, config_path, sequence):
    out_path = tmp_path / 'missing' / 'grid.bin'
    code, out, err = run(capsys, 'aggregate', '--config', config_path, '--sequence', str(sequence),
                         '--out', str(out_path))
    assert code == cli.EXIT_USAGE
    assert out == ''
    assert 'error: [io]' in err and str(out_path) in err
