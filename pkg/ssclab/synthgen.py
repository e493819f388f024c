"""Deterministic synthetic scenes: boxes (moving objects, walls, ground slabs) sampled
as labeled point clouds over several frames, together with the exact voxel footprint
of every box in every frame.

Points are placed inside the surface voxels of each box with an inward margin of
0.05 m from the voxel faces, so voxelization of the emitted points reproduces the
footprints exactly and a seed change only moves points within their voxels.
"""
from dataclasses import dataclass, field
import numpy as np
from . import log
from .exception import ArgumentError, FormatError
from .io import PointCloud, FrameLabels, PoseSE3
from .voxel import GridSpec

MARGIN = 0.05


@dataclass(frozen=True)
class SceneObject:
    """Axis-aligned box with lower corner ``position`` (meters, reference frame) moving by
    ``velocity`` meters per frame"""
    class_id: int
    instance_id: int
    extent: tuple
    position: tuple
    velocity: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        for name in ('extent', 'position', 'velocity'):
            v = tuple(float(x) for x in getattr(self, name))
            if len(v) != 3:
                raise ArgumentError('{} must have 3 components'.format(name))
            object.__setattr__(self, name, v)
        if min(self.extent) <= 0:
            raise ArgumentError('Degenerate box [instance={}, extent={}]'.format(self.instance_id, self.extent))

    def box(self, frame):
        lower = np.asarray(self.position) + frame * np.asarray(self.velocity)
        return lower, lower + np.asarray(self.extent)

    @property
    def moving(self):
        return any(v != 0 for v in self.velocity)


@dataclass(frozen=True)
class SceneScript:
    objects: tuple
    frame_count: int = 1
    points_per_face: int = 1
    seed: int = 42
    ego_velocity: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, 'objects', tuple(self.objects))
        object.__setattr__(self, 'ego_velocity', tuple(float(v) for v in self.ego_velocity))
        if self.frame_count < 1:
            raise ArgumentError('frame_count must be >= 1')
        if self.points_per_face < 1:
            raise ArgumentError('points_per_face must be >= 1')


@dataclass
class SyntheticScene:
    spec: GridSpec
    frames: list
    poses: list
    footprints: dict = field(default_factory=dict)
    classes: dict = field(default_factory=dict)

    def transforms(self):
        """Frame k to frame 0 transforms (poses are relative to frame 0)"""
        return list(self.poses)

    def trace_voxels(self, instance):
        """Union of the footprints of an instance over all frames, reference coordinates"""
        return set().union(*self.footprints[instance])

    def cube(self, instance, frame=0):
        """Inclusive voxel bound of an instance's footprint in one frame, None if unseen"""
        voxels = self.footprints[instance][frame]
        if not voxels:
            return None
        a = np.array(sorted(voxels))
        return tuple(int(v) for v in a.min(axis=0)), tuple(int(v) for v in a.max(axis=0))


def box_voxel_range(lower, upper, spec):
    """Inclusive voxel index range covered by the half-open box [lower, upper)"""
    origin, size = np.asarray(spec.origin), spec.voxel_size
    lo = np.floor((lower - origin) / size + 1e-9).astype(np.int64)
    hi = np.ceil((upper - origin) / size - 1e-9).astype(np.int64) - 1
    return lo, np.maximum(hi, lo)


def surface_voxels(lower, upper, spec):
    """Voxels on the shell of the box's voxel range that lie inside the grid, sorted"""
    lo, hi = box_voxel_range(lower, upper, spec)
    axes = [np.arange(lo[d], hi[d] + 1) for d in range(3)]
    grid = np.stack(np.meshgrid(*axes, indexing='ij'), axis=-1).reshape(-1, 3)
    shell = np.any((grid == lo) | (grid == hi), axis=1)
    inside = np.all((grid >= 0) & (grid < np.asarray(spec.dims)), axis=1)
    return grid[shell & inside]


def _sample_in_voxels(rng, voxels, count, spec):
    origin, size = np.asarray(spec.origin), spec.voxel_size
    lower = origin + np.repeat(voxels, count, axis=0) * size
    u = rng.uniform(0.0, 1.0, size=lower.shape)
    return lower + MARGIN + u * (size - 2 * MARGIN)


def generate(script, spec):
    """Sample every frame of the script.

    Object boxes are given in the reference (frame 0) coordinates. The sensor moves by
    ``ego_velocity`` per frame; points of frame k are expressed in its own sensor frame
    and ``poses[k]`` maps them back into frame 0.
    """
    if min(spec.voxel_size) <= 2 * MARGIN:
        raise ArgumentError('Voxel size must exceed twice the sampling margin')
    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(script.seed).spawn(max(len(script.objects), 1))]
    footprints = {o.instance_id: [] for o in script.objects}
    classes = {o.instance_id: o.class_id for o in script.objects}
    if len(footprints) != len(script.objects):
        raise ArgumentError('Instance ids must be unique')
    frames, poses = [], []
    for k in range(script.frame_count):
        pose = PoseSE3.from_translation(k * np.asarray(script.ego_velocity))
        points, sem, inst = [], [], []
        for o, rng in zip(script.objects, rngs):
            voxels = surface_voxels(*o.box(k), spec)
            footprints[o.instance_id].append({tuple(int(v) for v in x) for x in voxels})
            p = _sample_in_voxels(rng, voxels, script.points_per_face, spec)
            points.append(p)
            sem.append(np.full(len(p), o.class_id))
            inst.append(np.full(len(p), o.instance_id))
        world = np.concatenate(points) if points else np.zeros((0, 3))
        frames.append((PointCloud(pose.inverse().apply(world)),
                       FrameLabels(np.concatenate(sem) if sem else np.zeros(0),
                                   np.concatenate(inst) if inst else np.zeros(0))))
        poses.append(pose)
    log.info('Generated synthetic scene [frames={}, objects={}]'.format(script.frame_count, len(script.objects)))
    return SyntheticScene(spec, frames, poses, footprints, classes)


# ------------------------------------------------------------------------------------------------
# Scene scripts as key=value text
#
#   frame_count = 3
#   seed = 7
#   points_per_face = 2
#   ego_velocity = 0,0,0
#   object = class:1 instance:1 position:10,0.1,0.1 extent:0.8,0.8,0.8 velocity:1,0,0

def _vector(text, lineno):
    try:
        v = tuple(float(x) for x in text.split(','))
    except ValueError:
        raise FormatError('Bad vector \'{}\''.format(text), line=lineno)
    if len(v) != 3:
        raise FormatError('Vector must have 3 components', line=lineno)
    return v


def _int(text, lineno):
    try:
        return int(text)
    except ValueError:
        raise FormatError('Bad integer \'{}\''.format(text), line=lineno)


def parse_script(text):
    """Parse a scene script"""
    keys = {}
    objects = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise FormatError('Expected key = value', line=lineno)
        key, value = (s.strip() for s in line.split('=', 1))
        if key == 'object':
            fields = dict(f.split(':', 1) for f in value.split() if ':' in f)
            missing = {'class', 'instance', 'position', 'extent'} - set(fields)
            if missing:
                raise FormatError('Object is missing {}'.format(sorted(missing)), line=lineno)
            objects.append(SceneObject(
                _int(fields['class'], lineno), _int(fields['instance'], lineno),
                _vector(fields['extent'], lineno), _vector(fields['position'], lineno),
                _vector(fields.get('velocity', '0,0,0'), lineno)))
        elif key in ('frame_count', 'seed', 'points_per_face'):
            keys[key] = _int(value, lineno)
        elif key == 'ego_velocity':
            keys[key] = _vector(value, lineno)
        else:
            raise FormatError('Unknown key \'{}\''.format(key), line=lineno)
    return SceneScript(objects, **keys)


def demo_spec(num_classes=20):
    """Desk-scale grid: 32 x 32 x 8 voxels of 0.2 m"""
    return GridSpec(origin=(0.0, -3.2, -0.8), extent=(6.4, 6.4, 1.6), dims=(32, 32, 8), num_classes=num_classes)


def default_script(seed=42, frame_count=3):
    """A car driving past a wall over a ground slab, sized for :func:`demo_spec`"""
    return SceneScript(
        objects=(
            SceneObject(1, 1, (0.8, 0.6, 0.6), (1.1, -1.5, -0.5), (1.0, 0.0, 0.0)),
            SceneObject(13, 100, (5.0, 0.4, 1.0), (0.5, 1.5, -0.7)),
            SceneObject(9, 101, (6.0, 2.6, 0.2), (0.1, -1.9, -0.8)),
        ),
        frame_count=frame_count, points_per_face=2, seed=seed)
