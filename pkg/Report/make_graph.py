import matplotlib.pyplot as plt
import pandas as pd
import argparse
import os


def plot_sweep(csv_path, out_dir, column):
    """スイープ結果のCSVから，Kごとに指定した列をパラメータに対してプロットする．"""
    df = pd.read_csv(csv_path)
    param = df.columns[0]
    for K, group in df.groupby('K'):
        ok = group[group['feasible'] == 1]
        plt.plot(ok[param], ok[column], marker='o', label=f'K={K}')
    plt.xlabel(param)
    plt.ylabel(column)
    plt.legend()
    name = os.path.splitext(os.path.basename(csv_path))[0]
    path = os.path.join(out_dir, f'{name}_{column}.png')
    plt.savefig(path)
    plt.clf()
    return df, path


def main():
    parser = argparse.ArgumentParser(
        description="plot sweep CSV columns",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter
    )
    parser.add_argument('csv', nargs='+', help="sweep.csv files written by 'ness sweep'")
    parser.add_argument('--columns', nargs='+', default=['fidelity', 'Z_avg'],
                        help="columns to plot")
    parser.add_argument('--out', default='./data', help="directory for the figures")
    args = parser.parse_args()

    os.makedirs(args.out, exist_ok=True)
    for csv_path in args.csv:
        if not os.path.isfile(csv_path):
            print(f"File not found: {csv_path}")
            continue
        for column in args.columns:
            df, path = plot_sweep(csv_path, args.out, column)
            print(f'{path}: {len(df)} rows')
        feasible = df[df['feasible'] == 1]
        print(f'feasible points: {len(feasible)} / {len(df)}')
        if 'fidelity' in feasible and feasible['fidelity'].notna().any():
            print(f'minimum fidelity: {feasible["fidelity"].min():.6f}')


if __name__ == '__main__':
    main()
