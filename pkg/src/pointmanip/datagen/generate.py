"""Dataset generation: scripted source demos, retargeted sim expansion, and
the emulated pseudo-real split.

Every episode is seeded independently from the master seed, so generation
with one worker or many yields identical bytes, and failed retargets retry
with fresh scenes without disturbing other episodes' streams.
"""

import multiprocessing
from dataclasses import replace

import numpy as np

from .. import __version__
from ..errors import GenerationBudgetExceeded, ObjectFullyOccluded
from ..representation import RepresentationConfig, build_observation, default_template
from ..seeding import derive_seed, rng_from
from ..deploy.cameras import front_camera, perturb_camera, ring_cameras
from ..sim.scripted import Trajectory, scripted_demo
from ..sim.tasks import TaskSpec
from ..sim.world import build_scene
from .dataset import Dataset, EpisodeRecord, camera_to_json, world_to_json, write_dataset
from .retarget import generate_episode

MAX_ATTEMPTS_PER_EPISODE = 10


def make_source_demos(task: TaskSpec, per_pair: int = 5, seed: int = 0) -> list:
    """Scripted stand-ins for human demonstrations: per_pair demos for every
    instance pair, as (pair_index, Trajectory)."""
    demos = []
    for p in range(len(task.instance_pool)):
        for d in range(per_pair):
            scene = build_scene(task, p, derive_seed(seed, "srcdemo", p, d))
            demos.append((p, scripted_demo(scene, task)))
    return demos


def materialize_episode(
    task: TaskSpec,
    traj: Trajectory,
    cam,
    rep: RepresentationConfig,
    ep_seed: int,
    header: dict,
    store_observations: bool = True,
) -> EpisodeRecord:
    """Attach per-frame observations (and snapshots) to a replayed trajectory."""
    template = default_template()
    worlds, actions = [], []
    robots, groups, degraded = [], None, []
    for t, (world, action) in enumerate(traj.frames):
        worlds.append(world_to_json(world))
        actions.append(action)
        if store_observations:
            obs = build_observation(world, cam, rep, derive_seed(ep_seed, "frame", t), template=template)
            robots.append(obs.robot_points)
            if groups is None:
                groups = [[] for _ in obs.object_points]
            for g, pts in zip(groups, obs.object_points):
                g.append(pts)
            degraded.append(obs.degraded)
    n = len(actions)
    return EpisodeRecord(
        header=header,
        worlds=worlds,
        actions=np.array(actions),
        robot_points=np.array(robots) if store_observations else np.zeros((n, 0, 3)),
        object_points=[np.array(g) for g in groups] if groups else [],
        degraded=np.array(degraded, dtype=bool) if degraded else np.zeros(n, dtype=bool),
    )


def _gen_one_episode(args):
    (task, demos_by_pair, i, master_seed, rep, cameras, perturb, n_distractors, store_obs) = args
    pairs = sorted(demos_by_pair)
    pair = pairs[i % len(pairs)]
    demos = demos_by_pair[pair]
    demo = demos[(i // len(pairs)) % len(demos)]
    view_index = int(rng_from(derive_seed(master_seed, "view", i), "v").integers(len(cameras))) if len(cameras) > 1 else 0
    cam = cameras[view_index]
    if perturb:
        cam = perturb_camera(cam, derive_seed(master_seed, "campert", i))
    for attempt in range(MAX_ATTEMPTS_PER_EPISODE):
        ep_seed = derive_seed(master_seed, "ep", i, attempt)
        scene = build_scene(task, pair, ep_seed, n_distractors=n_distractors)
        traj = generate_episode(demo, scene, task, ep_seed)
        if traj is None:
            continue
        header = {
            "episode_index": i,
            "pair_index": pair,
            "holdout": False,
            "view_index": view_index,
            "seed": ep_seed,
            "attempts_used": attempt + 1,
            "segments": [list(s) for s in traj.segments],
        }
        try:
            rec = materialize_episode(task, traj, cam, rep, ep_seed, header, store_obs)
        except ObjectFullyOccluded:
            # replay succeeded but a task object left the camera's view at
            # some frame; discard like a failed retarget and retry
            continue
        return rec, attempt + 1
    return None, MAX_ATTEMPTS_PER_EPISODE


def _parallel_map(fn, items, jobs):
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with multiprocessing.get_context("fork").Pool(jobs) as pool:
        return pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs)))


def generate_dataset(
    task: TaskSpec,
    src_demos: list,
    n_target: int,
    master_seed: int,
    rep: RepresentationConfig = None,
    cameras: list = None,
    out_dir=None,
    jobs: int = 1,
    n_distractors: int = 0,
    store_observations: bool = True,
    multiview: bool = False,
) -> Dataset:
    """Expand source demos into n_target successful episodes.

    Each episode retargets a round-robin (source demo, instance pair) choice
    onto a fresh scene, retrying failed replays with new scenes up to a
    1-in-10 budget. Raises GenerationBudgetExceeded when an episode exhausts
    its retries.
    """
    rep = rep or RepresentationConfig(instruction=task.instruction, noise_sigma=0.01)
    if rep.instruction != task.instruction:
        rep = replace(rep, instruction=task.instruction)
    cameras = cameras if cameras is not None else (ring_cameras() if multiview else [front_camera()])
    demos_by_pair = {}
    for pair, demo in src_demos:
        demos_by_pair.setdefault(pair, []).append(demo)

    args = [
        (task, demos_by_pair, i, master_seed, rep, cameras, False, n_distractors, store_observations)
        for i in range(n_target)
    ]
    results = _parallel_map(_gen_one_episode, args, jobs)

    episodes, attempts = [], 0
    for rec, used in results:
        attempts += used
        if rec is None:
            raise GenerationBudgetExceeded(
                f"an episode failed {MAX_ATTEMPTS_PER_EPISODE} consecutive retargets"
            )
        episodes.append(rec)

    manifest = {
        "task_id": task.task_id,
        "instruction": task.instruction,
        "split": "sim",
        "master_seed": master_seed,
        "generator_version": __version__,
        "n_target": n_target,
        "attempts": attempts,
        "success_fraction": (n_target / attempts) if attempts else 1.0,
        "cameras": [camera_to_json(c) for c in cameras],
        "representation": rep.to_dict(),
        "store_observations": store_observations,
        "n_distractors": n_distractors,
        "multiview": multiview,
    }
    ds = Dataset(manifest=manifest, episodes=episodes)
    if out_dir is not None:
        write_dataset(ds, out_dir)
    return ds


def _pseudo_one_episode(args):
    (task, i, pairs, seed, rep, base_cam, camera_perturb, store_obs) = args
    pair = pairs[i % len(pairs)]
    ep_seed = derive_seed(seed, "pseudo", i)
    scene = build_scene(task, pair, ep_seed, holdout=True)
    traj = scripted_demo(scene, task)
    cam = perturb_camera(base_cam, derive_seed(seed, "campert", i)) if camera_perturb else base_cam
    header = {
        "episode_index": i,
        "pair_index": pair,
        "holdout": True,
        "view_index": 0,
        "seed": ep_seed,
        "attempts_used": 1,
        "segments": [list(s) for s in traj.segments],
    }
    return materialize_episode(task, traj, cam, rep, ep_seed, header, store_obs)


def make_pseudo_real_set(
    task: TaskSpec,
    n: int,
    seed: int,
    rep: RepresentationConfig = None,
    depth_noise_sigma: float = 0.002,
    camera_perturb: bool = True,
    out_dir=None,
    jobs: int = 1,
    store_observations: bool = True,
) -> Dataset:
    """Emulated real-robot demonstrations: scripted demos on held-out shapes
    with a perturbed camera and sensor-style depth noise, tagged pseudo_real."""
    if not task.holdout_pool:
        raise ValueError(f"task {task.task_id} defines no held-out instance variants")
    rep = rep or RepresentationConfig(instruction=task.instruction, noise_sigma=0.0)
    rep = replace(rep, instruction=task.instruction, depth_noise_sigma=depth_noise_sigma)
    base_cam = front_camera()
    pairs = list(range(len(task.holdout_pool)))
    args = [(task, i, pairs, seed, rep, base_cam, camera_perturb, store_observations) for i in range(n)]
    episodes = _parallel_map(_pseudo_one_episode, args, jobs)

    manifest = {
        "task_id": task.task_id,
        "instruction": task.instruction,
        "split": "pseudo_real",
        "master_seed": seed,
        "generator_version": __version__,
        "n_target": n,
        "attempts": n,
        "success_fraction": 1.0,
        "cameras": [camera_to_json(base_cam)],
        "camera_perturb": camera_perturb,
        "representation": rep.to_dict(),
        "store_observations": store_observations,
        "n_distractors": 0,
        "multiview": False,
    }
    ds = Dataset(manifest=manifest, episodes=episodes)
    if out_dir is not None:
        write_dataset(ds, out_dir)
    return ds
