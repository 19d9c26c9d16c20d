"""Standalone export script; flags mirror the ExportJob fields."""

import sys

import click

from adetag.errors import AdetagError

from .export import ExportJob, export_emissions


@click.command()
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), required=True, help="canonical jsonl corpus")
@click.option("--encoder", required=True, help="model name or local directory")
@click.option("--out", "out_dir", type=click.Path(), required=True, help="output directory")
@click.option("--max-len", type=int, default=128, show_default=True)
@click.option("--lowercase", is_flag=True)
@click.option("--seed", type=int, default=0, show_default=True, help="projection initialization seed")
def main(corpus_path, encoder, out_dir, max_len, lowercase, seed):
    """Export per-subword emission log-probabilities for a corpus."""
    job = ExportJob(corpus_path, encoder, out_dir, max_len=max_len, lowercase=lowercase, seed=seed)
    try:
        export_emissions(job)
    except (AdetagError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(f"export complete: {out_dir}")


if __name__ == "__main__":
    main()
