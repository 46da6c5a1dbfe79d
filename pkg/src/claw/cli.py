"""claw: one binary for design analysis, simulation, teleop files, and serving.

Exit codes: 0 success, 1 domain error (invalid spec, infeasible calibration,
bad files), 2 usage error. All file outputs are written atomically.
Set CLAW_LOG to control log verbosity (DEBUG/INFO/WARNING).
"""

from __future__ import annotations

import json
import logging
import os
import sys

import click

from . import geometry as geo
from .controller import GAIN_PRESETS
from .episode import DEFAULT_EPOCH, EpisodeLog
from .errors import ClawError
from .fileio import atomic_write_text, write_csv
from .lockstate import DEFAULT_CARRIER_RATE, StiffnessMode
from .scenario import (
    GRIP_FORCE_CEILING_N,
    SPEC_VERSION,
    TIMEOUT_S,
    ScenarioConfig,
)
from .session import SWEEP_CSV_COLUMNS, SimSession, misalignment_sweep
from .teleop import record as record_episode
from .teleop import replay as replay_episode
from .wristmodel import (
    AXES,
    DeformationEnvelope,
    FinRayWrist,
    PolynomialWrist,
    characterize_curve,
    default_params,
    rigid_params,
)


def _fail(message: str) -> "click.exceptions.Exit":
    click.echo(f"error: {message}", err=True)
    return SystemExit(1)


def _load_config(path: str) -> ScenarioConfig:
    if not os.path.exists(path):
        raise _fail(f"file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise _fail(f"cannot read scenario config {path}: {exc}")
    try:
        return ScenarioConfig(**payload)
    except Exception as exc:
        raise _fail(f"invalid scenario config: {exc}")


@click.group()
@click.option("--verbose", "-v", is_flag=True, help="Verbose logging.")
@click.option("--seed", type=int, default=None, help="Fix stochastic choices for reproducibility.")
@click.pass_context
def main(ctx, verbose, seed):
    """Design and simulation toolkit for the CLAW variable-stiffness wrist."""
    level = os.environ.get("CLAW_LOG", "DEBUG" if verbose else "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    ctx.ensure_object(dict)
    ctx.obj["seed"] = seed


def _parse_sweep_ranges(text: str) -> dict[str, tuple[float, float, float]]:
    """Parse 'R=10:2.5:20,L_total=150:10:210' style range specs."""
    ranges = {}
    for part in text.split(","):
        if not part.strip():
            continue
        try:
            name, spec = part.split("=", 1)
            lo, step, hi = (float(v) for v in spec.split(":"))
        except ValueError:
            raise _fail(f"bad sweep range {part!r}; expected field=min:step:max")
        ranges[name.strip()] = (lo, step, hi)
    if not ranges:
        raise _fail("empty sweep specification")
    return ranges


@main.command()
@click.option("--R", "radius", type=float, required=True, help="Arc radius R (mm).")
@click.option("--L-total", type=float, required=True, help="Total spring length (mm).")
@click.option("--d", "joint_d", type=float, default=None, help="Inter-axial joint distance (mm).")
@click.option("--D", "width", type=float, default=None, help="Loop width to invert for d (mm).")
@click.option("--L-clamp", type=float, default=geo.DEFAULT_L_CLAMP, show_default=True,
              help="Clamped section length (mm).")
@click.option("--L-joint-arm", type=float, default=geo.DEFAULT_L_JOINT_ARM, show_default=True,
              help="Joint-to-arc length (mm).")
@click.option("--X0", "x0", type=float, default=geo.DEFAULT_X0,
              help="Initial clamp-point X coordinate (mm).")
@click.option("--sweep", type=str, default=None,
              help="Grid sweep ranges, e.g. 'R=10:2.5:20,L_total=150:10:210'.")
@click.option("--max-D", type=float, default=None, help="Sweep constraint: maximum loop width.")
@click.option("--min-X-allow", type=float, default=None,
              help="Sweep constraint: minimum allowable travel.")
@click.option("--out", type=click.Path(), default=None, help="Write results CSV here.")
def design(radius, l_total, joint_d, width, l_clamp, l_joint_arm, x0, sweep, max_d,
           min_x_allow, out):
    """Evaluate or invert the leaf-spring loop design relations."""
    if sweep:
        ranges = _parse_sweep_ranges(sweep)
        base = geo.LeafSpringSpec(
            R=radius, L_total=l_total,
            d=joint_d if joint_d is not None else geo.compute_joint_distance(
                width if width is not None else 90.0, l_total, radius),
            L_clamp=l_clamp, L_joint_arm=l_joint_arm, X_0=x0,
        )
        results = geo.sweep_designs(ranges, max_D=max_d, min_X_allow=min_x_allow, base=base)
        rows = [geo.spec_csv_row(s, g) for s, g in results]
        if out:
            write_csv(out, geo.DESIGN_CSV_COLUMNS, rows)
            click.echo(f"{len(rows)} designs -> {out}")
        else:
            click.echo(",".join(geo.DESIGN_CSV_COLUMNS))
            for row in rows:
                click.echo(",".join(repr(row[c]) for c in geo.DESIGN_CSV_COLUMNS))
        return

    if width is not None and joint_d is not None:
        raise _fail("give either --d or --D, not both")
    if width is not None:
        joint_d = geo.compute_joint_distance(width, l_total, radius)
        click.echo(f"d = {joint_d:.4f} mm")
    elif joint_d is None:
        raise _fail("one of --d or --D is required")
    spec = geo.LeafSpringSpec(R=radius, L_total=l_total, d=joint_d,
                              L_clamp=l_clamp, L_joint_arm=l_joint_arm, X_0=x0)
    g = geo.loop_geometry(spec)
    click.echo(f"D = {g.D:.4f} mm")
    click.echo(f"L_bc = {g.L_bc:.4f} mm")
    click.echo(f"X_max = {g.X_max:.4f} mm")
    click.echo(f"X_allow = {g.X_allow:.4f} mm")
    click.echo("note: L_clamp/L_joint_arm/X_0 defaults are tool choices, not measured values")
    if out:
        write_csv(out, geo.DESIGN_CSV_COLUMNS, [geo.spec_csv_row(spec, g)])
        click.echo(f"wrote {out}")


@main.command()
@click.option("--axis", type=click.Choice(list(AXES)), required=True)
@click.option("--mode", type=click.Choice([m.value for m in StiffnessMode]), default="free",
              show_default=True)
@click.option("--gripper", type=click.Choice(["claw", "rigid", "finray"]), default="claw",
              show_default=True, help="Model to characterize (baselines for comparison plots).")
@click.option("--steps", type=int, default=40, show_default=True)
@click.option("--out", type=click.Path(), default=None, help="Write curve CSV here.")
def characterize(axis, mode, gripper, steps, out):
    """Export force/deflection curves per axis and stiffness mode."""
    if steps < 1:
        raise _fail("--steps must be at least 1")
    model = {"claw": lambda: PolynomialWrist(default_params()),
             "rigid": lambda: PolynomialWrist(rigid_params()),
             "finray": FinRayWrist}[gripper]()
    rows = characterize_curve(axis, StiffnessMode(mode), steps=steps, model=model)
    unit_col = "deflection_mm" if axis in ("x", "y", "z") else "deflection_deg"
    value_col = "force_N" if axis in ("x", "y", "z") else "torque_Nm"
    table = [{unit_col: d, value_col: f, "mode": mode} for d, f in rows]
    if out:
        write_csv(out, (unit_col, value_col, "mode"), table)
        click.echo(f"{len(table)} rows -> {out}")
    else:
        click.echo(",".join((unit_col, value_col, "mode")))
        for r in table:
            click.echo(f"{r[unit_col]!r},{r[value_col]!r},{mode}")


def _default_dump() -> dict:
    env = DeformationEnvelope()
    params = default_params()
    coeffs = {
        f"{axis}/{mode.value}": list(params.coeff(axis, mode))
        for axis in ("x", "y", "z_comp", "z_ext", "roll", "pitch", "yaw")
        for mode in StiffnessMode
    }
    gains = {}
    for name, factory in GAIN_PRESETS.items():
        g = factory()
        gains[name] = {
            "virtual_mass": list(g.virtual_mass),
            "virtual_damping": list(g.virtual_damping),
            "stiffness_to_target": list(g.stiffness_to_target),
            "force_deadband": g.force_deadband,
            "track_exact": g.track_exact,
        }
    return {
        "spec_version": SPEC_VERSION,
        "envelope": {k: getattr(env, k) for k in env.__dataclass_fields__},
        "stiffness_coefficients": coeffs,
        "barrier_gain": params.barrier_gain,
        "controller_gains": gains,
        "carrier_rate": DEFAULT_CARRIER_RATE,
        "timeout_s": TIMEOUT_S,
        "grip_force_ceiling_N": GRIP_FORCE_CEILING_N,
        "scenario_defaults": {
            kind: ScenarioConfig(kind=kind).model_dump(mode="json")
            for kind in ("peg_in_hole", "door_handle", "wall_touch")
        },
    }


@main.command("print-config")
def print_config():
    """Print every model/controller/scenario default as JSON."""
    click.echo(json.dumps(_default_dump(), indent=2, sort_keys=True))


@main.command()
@click.argument("config_path", type=str)
@click.option("--sweep", "sweep_spec", type=str, default=None,
              help="Offset sweep, e.g. 'offsets=0:0.25:5,axis=x,grippers=claw_free,rigid'.")
@click.option("--out", type=click.Path(), default=None, help="Results CSV path.")
@click.option("--record", "record_path", type=click.Path(), default=None,
              help="Also write the episode log of a single run.")
@click.option("--print-config", "show_config", is_flag=True,
              help="Print all defaults as JSON and exit.")
def simulate(config_path, sweep_spec, out, record_path, show_config):
    """Run a scenario config to completion, or sweep misalignments."""
    if show_config:
        click.echo(json.dumps(_default_dump(), indent=2, sort_keys=True))
        return
    config = _load_config(config_path)
    if sweep_spec:
        offsets = None
        axis = "x"
        grippers = ["claw_free", "rigid"]
        for part in sweep_spec.split(","):
            part = part.strip()
            if part.startswith("offsets="):
                lo, step, hi = (float(v) for v in part[len("offsets="):].split(":"))
                offsets = []
                i = 0
                while lo + i * step <= hi + 1e-9:
                    offsets.append(lo + i * step)
                    i += 1
            elif part.startswith("axis="):
                axis = part[len("axis="):]
            elif part.startswith("grippers="):
                grippers = [part[len("grippers="):]]
            elif part and "=" not in part:
                grippers.append(part)
            elif part:
                raise _fail(f"bad sweep token {part!r}")
        if offsets is None:
            raise _fail("sweep needs offsets=min:step:max")
        rows = []
        for gripper in grippers:
            for res in misalignment_sweep(config, gripper, offsets, axis=axis):
                rows.append(res.csv_row())
        if out:
            write_csv(out, SWEEP_CSV_COLUMNS, rows)
            click.echo(f"{len(rows)} runs -> {out}")
        else:
            click.echo(",".join(SWEEP_CSV_COLUMNS))
            for row in rows:
                click.echo(",".join(str(row[c]) for c in SWEEP_CSV_COLUMNS))
        return

    session = SimSession(config)
    status = session.run()
    click.echo(f"outcome: {status.outcome}")
    click.echo(f"elapsed: {status.elapsed:.2f} s")
    if config.kind == "door_handle":
        click.echo(f"handle_angle: {status.handle_angle:.2f} deg "
                   f"(latch {'released' if status.latch_released else 'held'})")
    else:
        click.echo(f"insertion_depth: {status.insertion_depth:.2f} mm")
    click.echo(f"peak_force: {session.peak_force:.2f} N")
    if record_path and session.log is not None:
        session.log.save(record_path)
        click.echo(f"episode -> {record_path}")
    if out:
        write_csv(out, SWEEP_CSV_COLUMNS, [{
            "offset_x_mm": config.initial_misalignment[0],
            "offset_y_mm": config.initial_misalignment[1],
            "gripper": config.gripper,
            "outcome": status.outcome,
            "depth_mm": status.insertion_depth,
            "peak_force_N": session.peak_force,
            "elapsed_s": status.elapsed,
        }])
        click.echo(f"wrote {out}")


@main.command("record")
@click.argument("config_path", type=str)
@click.option("--out", type=click.Path(), required=True, help="Episode CSV path.")
@click.option("--wall-clock", is_flag=True,
              help="Stamp the log with the real start time instead of the fixed epoch.")
def record_cmd(config_path, out, wall_clock):
    """Run the config's scripted trajectory and record the episode."""
    config = _load_config(config_path)
    started = DEFAULT_EPOCH
    if wall_clock:
        from datetime import datetime, timezone

        started = datetime.now(timezone.utc).isoformat(timespec="seconds")
    log = record_episode(config, started=started)
    log.save(out)
    click.echo(f"{len(log.rows)} rows -> {out}")


@main.command("replay")
@click.argument("episode_path", type=str)
@click.option("--scenario", "scenario_path", type=str, required=True,
              help="Scenario config the episode was recorded under.")
@click.option("--mode-override", type=str, default=None,
              help="Fixed mode (free|half_lock|full_lock) or a schedule JSON path.")
@click.option("--out", type=click.Path(), default=None, help="Write the replayed episode here.")
def replay_cmd(episode_path, scenario_path, mode_override, out):
    """Replay a recorded episode, optionally overriding the stiffness channel."""
    if not os.path.exists(episode_path):
        raise _fail(f"file not found: {episode_path}")
    config = _load_config(scenario_path)
    log = EpisodeLog.load(episode_path)
    fixed = None
    schedule = None
    if mode_override:
        if mode_override in [m.value for m in StiffnessMode]:
            fixed = mode_override
        else:
            if not os.path.exists(mode_override):
                raise _fail(f"mode override {mode_override!r} is neither a mode nor a file")
            with open(mode_override, "r", encoding="utf-8") as fh:
                schedule = [(float(t), str(m)) for t, m in json.load(fh)]
    new_log, session = replay_episode(log, config, mode_override=fixed, mode_schedule=schedule)
    status = session.status
    click.echo(f"outcome: {status.outcome}")
    click.echo(f"elapsed: {status.elapsed:.2f} s")
    if out:
        new_log.save(out)
        click.echo(f"{len(new_log.rows)} rows -> {out}")


@main.command()
@click.option("--bind", type=str, default="127.0.0.1:8000", show_default=True,
              help="addr:port to listen on.")
@click.option("--log-dir", type=click.Path(), default=None,
              help="Persist terminal-session episode logs here.")
@click.option("--max-sessions", type=int, default=16, show_default=True)
@click.option("--time-scale", type=float, default=1.0, show_default=True,
              help="Simulated seconds per wall second (0.1 to 10).")
@click.option("--no-pacing", is_flag=True, help="Run sessions as fast as possible.")
@click.option("--ui-dir", type=click.Path(), default=None,
              help="Static UI assets to serve at /.")
def serve(bind, log_dir, max_sessions, time_scale, no_pacing, ui_dir):
    """Run the long-lived session server (REST + WebSocket + UI)."""
    import uvicorn

    from .service import ServiceSettings, create_app

    try:
        host, port = bind.rsplit(":", 1)
        port = int(port)
    except ValueError:
        raise _fail(f"bad --bind {bind!r}; expected addr:port")
    if log_dir:
        os.makedirs(log_dir, exist_ok=True)
    if ui_dir is None:
        bundled = os.path.join(os.path.dirname(__file__), "..", "..", "frontend", "dist")
        ui_dir = bundled if os.path.isdir(bundled) else None
    try:
        settings = ServiceSettings(
            max_sessions=max_sessions,
            time_scale=time_scale,
            no_pacing=no_pacing,
            log_dir=log_dir,
            ui_dir=ui_dir,
        )
    except ValueError as exc:
        raise _fail(str(exc))
    app = create_app(settings)
    uvicorn.run(app, host=host, port=port, log_level="warning")


def run(argv=None) -> int:
    try:
        main.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.UsageError as exc:
        exc.show()
        return 2
    except click.exceptions.Abort:
        return 2
    except click.exceptions.ClickException as exc:
        exc.show()
        return 1
    except ClawError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except SystemExit as exc:
        code = exc.code
        return int(code) if code is not None else 0


def entry() -> None:
    sys.exit(run())


if __name__ == "__main__":
    entry()
