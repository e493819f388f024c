"""Execute the functional and performance notebooks of ssclab.

Notebooks are the ``func_*.py`` and ``perf_*.py`` jupytext files next to this script.
A failing notebook is reported and the remaining ones still run; the exit status is
the number of failures.
"""
import os
import sys
import glob
import time
import argparse
from colorama import Fore, Style
import pandas as pd
import nbformat
from nbconvert.preprocessors import ExecutePreprocessor, CellExecutionError
import jupytext
import nbmerge


def find_notebooks(base_path, patterns):
    names = set()
    for prefix in ('func_', 'perf_'):
        for path in glob.glob(os.path.join(base_path, prefix + '*.py')):
            names.add(os.path.splitext(os.path.basename(path))[0])
    if patterns:
        names = {n for n in names if any(p in n for p in patterns)}
    # functional tests before performance tests
    return sorted(names, key=lambda n: (n.startswith('perf_'), n))


def execute(base_path, name, output_dir, timeout):
    nb = jupytext.read(os.path.join(base_path, name + '.py'))
    ep = ExecutePreprocessor(timeout=timeout)
    try:
        ep.preprocess(nb, {'metadata': {'path': base_path}})
        error = None
    except CellExecutionError as e:
        error = str(e).strip().splitlines()[-1]
    # the partially executed notebook is kept for inspection
    with open(os.path.join(output_dir, name + '.ipynb'), mode='w', encoding='utf-8') as f:
        nbformat.write(nb, f)
    return error


def main():
    parser = argparse.ArgumentParser(description='Execute functional and performance notebooks')
    parser.add_argument('--output_dir', type=str, default='executed_functest', help='Output directory of executed notebooks')
    parser.add_argument('--only', nargs='*', default=[], help='Run notebooks whose names contain one of these strings')
    parser.add_argument('--timeout', type=int, default=600, help='Timeout per cell in seconds')
    parser.add_argument('--no_merge', action='store_true', help='Skip writing merged.ipynb')
    args = parser.parse_args()

    os.makedirs(args.output_dir, exist_ok=True)
    base_path = os.path.dirname(os.path.realpath(__file__))
    names = find_notebooks(base_path, args.only)
    if not names:
        print(Fore.RED + 'No notebook matches {}'.format(args.only) + Style.RESET_ALL)
        return 1

    rows = []
    for name in names:
        print(Fore.GREEN + "Running notebook [name='{}']".format(name) + Style.RESET_ALL, flush=True)
        start = time.time()
        error = execute(base_path, name, args.output_dir, args.timeout)
        if error is not None:
            print(Fore.RED + "Failed [name='{}']: {}".format(name, error) + Style.RESET_ALL, flush=True)
        rows.append({'notebook': name, 'status': 'FAIL' if error else 'PASS', 'seconds': time.time() - start})
    summary = pd.DataFrame(rows).set_index('notebook')
    print(summary.to_string(float_format=lambda v: '{:.1f}'.format(v)))

    if not args.no_merge:
        paths = [os.path.join(args.output_dir, name + '.ipynb') for name in names]
        nb = nbmerge.merge_notebooks(os.getcwd(), paths)
        with open(os.path.join(args.output_dir, 'merged.ipynb'), mode='w', encoding='utf-8') as f:
            nbformat.write(nb, f)

    failures = int((summary['status'] == 'FAIL').sum())
    color = Fore.RED if failures else Fore.GREEN
    print(color + '{} of {} notebooks passed'.format(len(names) - failures, len(names)) + Style.RESET_ALL)
    return failures


if __name__ == '__main__':
    sys.exit(main())
