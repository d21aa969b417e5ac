import subprocess
import json
import sys
import os
import csv


def run_single_sweep(config_path, timeout=600):
    """
    1つの設定ファイルでスイープを実行し、CSVの行と終了コードを返す
    """
    print(f"--- Starting sweep {config_path} ---")
    with open(config_path, encoding='utf-8') as f:
        output = json.load(f).get('output', 'result')

    cmd = [sys.executable, os.path.join(os.path.dirname(__file__), "ness.py"),
           "sweep", "--config", config_path]
    try:
        proc = subprocess.run(cmd, capture_output=True, text=True, encoding='utf-8',
                              timeout=timeout)
    except subprocess.TimeoutExpired:
        print(f"Sweep {config_path} timed out!")
        return [], None

    if proc.returncode != 0:
        print(f"Sweep exited with code {proc.returncode}. Error log:")
        print(proc.stderr)

    csv_path = os.path.join(output, "sweep.csv")
    if not os.path.isfile(csv_path):
        print(f"File not found: {csv_path}")
        return [], proc.returncode
    with open(csv_path, newline='', encoding='utf-8') as f:
        rows = list(csv.DictReader(f))
    print(f"Sweep {config_path} finished with {len(rows)} rows")
    return rows, proc.returncode


def main():
    """
    configs/ 以下の全スイープを実行し、集計を表示する
    """
    config_dir = os.path.join(os.path.dirname(__file__), "configs")
    configs = sorted(os.path.join(config_dir, name) for name in os.listdir(config_dir)
                     if name.endswith("_sweep.json") or name.endswith("_random.json"))

    for path in configs:
        rows, code = run_single_sweep(path)
        feasible = [r for r in rows if r.get('feasible') == '1']
        fidelities = [float(r['fidelity']) for r in feasible if r.get('fidelity')]

        # 集計の表示
        print("\n" + "=" * 30)
        print(f"      {os.path.basename(path)}")
        print("=" * 30)
        print(f"Exit code: {code}")
        print(f"Points:    {len(rows)}")
        print(f"Feasible:  {len(feasible)}")
        print(f"Errors:    {sum(1 for r in rows if r.get('error'))}")
        if fidelities:
            print(f"Min fidelity (feasible): {min(fidelities):.6f}")
        print("=" * 30)


if __name__ == "__main__":
    main()
