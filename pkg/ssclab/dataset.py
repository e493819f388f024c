"""Dataset presets: class names in report order, moving classes and raw label maps"""
from dataclasses import dataclass
from .exception import ArgumentError
from .voxel import GridSpec


@dataclass(frozen=True)
class DatasetPreset:
    name: str
    class_names: tuple
    moving_classes: frozenset
    learning_map: dict

    @property
    def num_classes(self):
        return len(self.class_names) + 1

    def grid_spec(self, **kwargs):
        return GridSpec(num_classes=self.num_classes, **kwargs)


SEMANTICKITTI = DatasetPreset(
    'semantickitti',
    ('car', 'bicycle', 'motorcycle', 'truck', 'other-vehicle', 'person', 'bicyclist',
     'motorcyclist', 'road', 'parking', 'sidewalk', 'other-ground', 'building', 'fence',
     'vegetation', 'trunk', 'terrain', 'pole', 'traffic-sign'),
    frozenset(range(1, 9)),
    {
        10: 1, 11: 2, 13: 5, 15: 3, 16: 5, 18: 4, 20: 5, 30: 6, 31: 7, 32: 8,
        40: 9, 44: 10, 48: 11, 49: 12, 50: 13, 51: 14, 60: 9, 70: 15, 71: 16, 72: 17,
        80: 18, 81: 19, 252: 1, 253: 7, 254: 6, 255: 8, 256: 5, 257: 5, 258: 4, 259: 5,
    })

SEMANTICPOSS = DatasetPreset(
    'semanticposs',
    ('person', 'rider', 'car', 'trunk', 'plants', 'traffic-sign', 'pole', 'building',
     'fence', 'bike', 'ground'),
    frozenset({1, 2, 3, 10}),
    {
        4: 1, 5: 1, 6: 2, 7: 3, 8: 4, 9: 5, 10: 6, 11: 6, 12: 6, 13: 7, 15: 8, 17: 9,
        21: 10, 22: 11,
    })

PRESETS = {p.name: p for p in (SEMANTICKITTI, SEMANTICPOSS)}


def preset(name):
    if name not in PRESETS:
        raise ArgumentError('Unknown dataset preset \'{}\' (choose from {})'.format(name, sorted(PRESETS)))
    return PRESETS[name]


def generic_class_names(num_classes):
    return tuple('class{}'.format(c) for c in range(1, num_classes))
