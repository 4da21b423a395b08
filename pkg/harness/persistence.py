"""Flat key=value config files, run manifests, grid CSVs and phantom images."""
import configparser
import csv
import logging
import os
import platform

import numpy as np
import scipy
from PIL import Image

from misc.errors import ConfigError

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = 'AFISTA_OUTPUT_DIR'
GRID_HEADER = ['alpha', 'beta', 'mean_err', 'std_err', 'trials']
_SECTION = 'config'


def read_config(path):
    """Parse `key = value` lines (with # comments) into a dict of strings."""
    if not os.path.isfile(path):
        raise ConfigError('config', 'no such config file {}'.format(path))
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=('#',))
    with open(path) as f:
        text = f.read()
    try:
        parser.read_string('[{}]\n{}'.format(_SECTION, text), source=path)
    except configparser.DuplicateOptionError as e:
        raise ConfigError(e.option, 'given twice in {}'.format(path))
    except configparser.Error as e:
        raise ConfigError('config', 'cannot parse {}: {}'.format(path, e))
    return dict(parser.items(_SECTION))


def format_value(value):
    if isinstance(value, (list, tuple)):
        return ','.join(format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_flat(path, mapping, header=None):
    with open(path, 'w') as f:
        if header:
            f.write('# {}\n'.format(header))
        for key in mapping:
            if mapping[key] is None:
                continue
            f.write('{} = {}\n'.format(key, format_value(mapping[key])))


def write_manifest(output_path, mapping, master_seed):
    """Write `<output_path>.manifest`: resolved config, seed and library versions."""
    entries = dict(mapping)
    entries['master_seed'] = master_seed
    entries['numpy_version'] = np.__version__
    entries['scipy_version'] = scipy.__version__
    entries['python_version'] = platform.python_version()
    path = output_path + '.manifest'
    write_flat(path, entries, header='run manifest')
    logger.info('manifest written to %s', path)
    return path


def resolve_output(path):
    """Relative paths land in $AFISTA_OUTPUT_DIR when it is set."""
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not os.path.isabs(path):
        path = os.path.join(base, path)
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    return path


def write_grid_csv(path, result):
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(GRID_HEADER)
        for cell in result.cells:
            writer.writerow([repr(cell.alpha), repr(cell.beta), repr(cell.mean_err), repr(cell.std_err), cell.trials])


def read_grid_csv(path):
    """Rows of (alpha, beta, mean_err, std_err, trials)."""
    rows = []
    with open(path, newline='') as f:
        reader = csv.reader(f)
        header = next(reader)
        if header != GRID_HEADER:
            raise ValueError('unexpected grid header {}'.format(header))
        for row in reader:
            rows.append((float(row[0]), float(row[1]), float(row[2]), float(row[3]), int(row[4])))
    return rows


def write_rows(path, header, rows):
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def save_image(path, image):
    """8-bit grayscale PNG of an image with values in [0, 1] (clipped)."""
    pixels = np.uint8(np.rint(np.clip(image, 0.0, 1.0) * 255.0))
    Image.fromarray(pixels, mode='L').save(path)
