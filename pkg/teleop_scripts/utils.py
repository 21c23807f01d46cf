import csv
import hashlib
import json
import math
import os

import numpy as np


def create_output_directory(output_dir):
    """
    Create the output directory (and parents) if it doesn't exist
    """
    os.makedirs(output_dir, exist_ok=True)
    if not os.access(output_dir, os.W_OK):
        raise PermissionError(f"Output directory is not writable: {output_dir}")
    return output_dir


def format_value(value):
    """
    Render one CSV cell. Floats use repr so the text round-trips exactly.
    """
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return ''
        return repr(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(getattr(value, 'value', value))


def write_csv(path, header, rows):
    """
    Write rows under a fixed header with '\\n' line endings
    """
    with open(path, 'w', newline='', encoding='utf-8') as fout:
        writer = csv.writer(fout, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(value) for value in row])
    return path


def write_columns_csv(path, columns):
    """
    Write equal-length arrays as CSV columns, one row per index
    """
    header = list(columns)
    arrays = [np.asarray(columns[name]).tolist() for name in header]
    return write_csv(path, header, zip(*arrays))


def write_json(path, payload):
    with open(path, 'w', encoding='utf-8') as fout:
        json.dump(payload, fout, indent=2, sort_keys=True)
        fout.write('\n')
    return path


def sha256_file(path):
    digest = hashlib.sha256()
    with open(path, 'rb') as fin:
        for chunk in iter(lambda: fin.read(65536), b''):
            digest.update(chunk)
    return digest.hexdigest()


def stable_hash(text, digits=8):
    """
    Integer from the leading hex digits of the sha256 of `text`
    """
    return int(hashlib.sha256(text.encode('utf-8')).hexdigest()[:digits], 16)
