"""Command-line entry points: serve the HTTP API, or index/inspect/measure
trajectories offline."""

from __future__ import annotations

import logging
import socket
import sys
from pathlib import Path

import click

from mdstream.analysis import MeasurementSpec, time_trace
from mdstream.errors import MdstreamError
from mdstream.model import parse_pdb
from mdstream.traj import open_trajectory, scan_trajectory, write_mdix


@click.group()
def main():
    """Molecular-dynamics trajectory streaming and desk-scale analysis."""


@main.command()
@click.option("--port", default=8091, show_default=True, help="TCP port (0 = ephemeral).")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option(
    "--data-dir", required=True, type=click.Path(path_type=Path),
    help="Directory holding registered trajectories and sessions.",
)
@click.option("--cache-mb", default=512, show_default=True, help="Frame cache budget.")
@click.option(
    "--cors-origin", "cors_origins", multiple=True,
    help="Allowed CORS origin for the viewer (repeatable).",
)
@click.option("--max-download-gb", default=16.0, show_default=True)
def serve(port, host, data_dir, cache_mb, cors_origins, max_download_gb):
    """Run the streaming server."""
    import uvicorn

    from mdstream.server import ServerConfig, create_app

    logging.basicConfig(
        level=logging.INFO, format="%(asctime)s %(name)s %(message)s"
    )
    config = ServerConfig(
        data_dir=data_dir,
        cache_mb=cache_mb,
        cors_origins=tuple(cors_origins),
        max_download_gb=max_download_gb,
    )
    app = create_app(config)

    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        sock.bind((host, port))
    except OSError as exc:
        click.echo(f"error: cannot bind {host}:{port}: {exc}", err=True)
        sock.close()
        sys.exit(1)
    bound_port = sock.getsockname()[1]
    click.echo(f"listening on http://{host}:{bound_port} (data dir: {config.data_dir})")

    server = uvicorn.Server(
        uvicorn.Config(app, log_level="warning", access_log=False)
    )
    # uvicorn drains in-flight requests on SIGTERM, then re-raises the signal
    # with handlers restored; ours turns that into a clean zero exit
    import signal as signal_mod

    signal_mod.signal(signal_mod.SIGTERM, lambda signum, frame: sys.exit(0))
    server.run(sockets=[sock])


@main.command()
@click.argument("trajectory", type=click.Path(exists=True, path_type=Path))
@click.option("--output", type=click.Path(path_type=Path), default=None,
              help="Index path (default: <trajectory>.mdix).")
def index(trajectory, output):
    """Scan a trajectory and write its MDIX index sidecar."""
    meta, frame_index = scan_trajectory(trajectory)
    target = output or trajectory.with_suffix(trajectory.suffix + ".mdix")
    write_mdix(frame_index, target)
    click.echo(f"indexed {meta.n_frames} frames -> {target}")
    if frame_index.truncated:
        click.echo("warning: file ends in a truncated frame (excluded)", err=True)


@main.command()
@click.argument("trajectory", type=click.Path(exists=True, path_type=Path))
def info(trajectory):
    """Print trajectory metadata."""
    meta, frame_index = scan_trajectory(trajectory)
    click.echo(f"format={meta.format} atoms={meta.n_atoms} frames={meta.n_frames}")
    if meta.timestep_ps is not None:
        click.echo(f"timestep_ps={meta.timestep_ps:g}")
    click.echo(f"file_size={meta.file_size}")
    if frame_index.truncated:
        click.echo("warning: file ends in a truncated frame (excluded)", err=True)


def _spec_from_flags(distance, angle, dihedral, rmsd_sel, ref, no_superpose) -> MeasurementSpec:
    chosen = [x for x in (distance, angle, dihedral, rmsd_sel) if x]
    if len(chosen) != 1:
        raise click.UsageError(
            "choose exactly one of --distance/--angle/--dihedral/--rmsd"
        )
    if distance:
        return MeasurementSpec("distance", distance)
    if angle:
        return MeasurementSpec("angle", angle)
    if dihedral:
        return MeasurementSpec("dihedral", dihedral)
    return MeasurementSpec(
        "rmsd", rmsd_sel, reference_frame=ref, superpose=not no_superpose
    )


@main.command()
@click.argument("structure", type=click.Path(exists=True, path_type=Path))
@click.argument("trajectory", type=click.Path(exists=True, path_type=Path))
@click.option("--distance", nargs=2, type=int, default=None, help="Two atom indices.")
@click.option("--angle", nargs=3, type=int, default=None, help="Three atom indices.")
@click.option("--dihedral", nargs=4, type=int, default=None, help="Four atom indices.")
@click.option("--rmsd", "rmsd_sel", default=None,
              help='Selection for RMSD: "all" or a comma-separated index list.')
@click.option("--ref", default=0, show_default=True, help="RMSD reference frame.")
@click.option("--no-superpose", is_flag=True, help="Skip superposition before RMSD.")
def trace(structure, trajectory, distance, angle, dihedral, rmsd_sel, ref, no_superpose):
    """Evaluate a measurement on every frame; print CSV (frame,time_ps,value,unit)."""
    struct_obj = parse_pdb(Path(structure).read_bytes(), structure_id=str(structure))
    with open_trajectory(trajectory) as reader:
        if rmsd_sel is not None:
            if rmsd_sel.strip().lower() == "all":
                rmsd_sel = tuple(range(reader.meta.n_atoms))
            else:
                rmsd_sel = tuple(int(x) for x in rmsd_sel.split(","))
        spec = _spec_from_flags(distance, angle, dihedral, rmsd_sel, ref, no_superpose)
        try:
            result = time_trace(reader, struct_obj, spec)
        except MdstreamError as exc:
            raise click.ClickException(str(exc)) from exc
        times = [reader.read_frame(i).time_ps for i in result.frame_numbers]
    click.echo("frame,time_ps,value,unit")
    for frame_no, t, value in zip(result.frame_numbers, times, result.values):
        click.echo(f"{frame_no},{t:g},{value!r},{result.spec.unit}")


if __name__ == "__main__":
    main()
