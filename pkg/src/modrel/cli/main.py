import click

from modrel.cli import estimate, reliability, simulate, validate


@click.group()
def cli():
    """Reliability of module-based software systems."""


cli.add_command(validate.cli, "validate")
cli.add_command(reliability.cli, "reliability")
cli.add_command(simulate.cli, "simulate")
cli.add_command(estimate.cli, "estimate")


if __name__ == "__main__":
    cli()
