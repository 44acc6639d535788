#!/usr/bin/env python3
"""Regenerate the demo routine files under src/helion/data/.

Produces a 40-user cohort (5-9 routines each) plus a small single-user
routines file. Deterministic: same seed, same output. Run from the repo
root after changing the vocabulary or the template pool.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

from helion import ScheduleConfig, Vocabulary, load_vocabulary
from helion.scheduling import corpus_from_users, load_user_routines

DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "helion" / "data"
SEED = 20240817
NUM_USERS = 40

# (trigger, [candidate action lists]) pairs that read like real routines.
TEMPLATES: list[tuple[str, list[list[str]]]] = [
    ("motion_sensor,motion,detected", [
        ["security_camera,image,take"],
        ["security_camera,image,take", "porch_light,switch,on"],
        ["living_room_light,switch,on"],
    ]),
    ("motion_sensor,motion,not_detected", [
        ["living_room_light,switch,off"],
        ["light_bulb,switch,off"],
    ]),
    ("user,presence,home", [
        ["door_lock,lock,unlocked", "light_bulb,switch,on"],
        ["thermostat,mode,heat"],
        ["alarm_system,mode,disarmed", "living_room_light,switch,on"],
        ["speaker,playback,playing"],
        ["ceiling_fan,switch,on"],
    ]),
    ("user,presence,away", [
        ["door_lock,lock,locked", "alarm_system,mode,armed_away"],
        ["light_bulb,switch,off", "tv,switch,off"],
        ["thermostat,mode,off", "security_camera,recording,on"],
        ["vacuum,state,cleaning"],
    ]),
    ("doorbell,button,pressed", [
        ["security_camera,image,take"],
        ["porch_light,switch,on", "security_camera,image,take"],
        ["speaker,playback,paused"],
    ]),
    ("front_door,contact,open", [
        ["porch_light,switch,on"],
        ["security_camera,image,take", "light_bulb,switch,on"],
    ]),
    ("front_door,contact,closed", [
        ["door_lock,lock,locked"],
        ["porch_light,switch,off"],
    ]),
    ("smoke_detector,alarm,detected", [
        ["light_bulb,switch,on", "door_lock,lock,unlocked"],
        ["speaker,playback,stopped", "thermostat,mode,off"],
    ]),
    ("water_leak_sensor,water,wet", [
        ["speaker,playback,stopped"],
        ["washer,state,idle"],
    ]),
    ("washer,state,finished", [
        ["speaker,playback,playing"],
        ["light_bulb,switch,on"],
    ]),
    ("garage_door,door,open", [
        ["porch_light,switch,on"],
        ["security_camera,recording,on"],
    ]),
    ("garage_door,door,closed", [
        ["porch_light,switch,off"],
    ]),
    ("thermostat,mode,heat", [
        ["ceiling_fan,switch,off"],
        ["window_blind,shade,closed"],
    ]),
    ("thermostat,mode,cool", [
        ["ceiling_fan,switch,on"],
        ["window_blind,shade,partially_open"],
    ]),
    ("bedroom_light,switch,off", [
        ["window_blind,shade,closed", "door_lock,lock,locked"],
        ["tv,switch,off", "speaker,playback,stopped"],
        ["alarm_system,mode,armed_home"],
    ]),
    ("bedroom_light,switch,on", [
        ["window_blind,shade,open"],
        ["coffee_maker,switch,on"],
        ["humidifier,switch,off"],
    ]),
    ("coffee_maker,switch,on", [
        ["speaker,playback,playing"],
        ["tv,switch,on"],
    ]),
    ("tv,switch,on", [
        ["living_room_light,switch,off"],
        ["bedroom_light,level,low", "window_blind,shade,closed"],
    ]),
    ("vacuum,state,docked", [
        ["speaker,playback,playing"],
    ]),
    ("humidifier,switch,on", [
        ["ceiling_fan,switch,off"],
    ]),
]

# Indicator pools; frequency weights tune the cohort to roughly 30k events.
TIME_RANGES = [
    "early_morning", "morning", "noon", "afternoon",
    "evening", "night", "late_night", "any",
]
DAY_RANGES = ["mostly_weekdays", "mostly_weekends", "any"]
DAY_RANGE_WEIGHTS = [0.35, 0.15, 0.5]
FREQUENCIES = [
    "many_times_a_day", "few_times_a_day", "once_a_day",
    "few_times_a_week", "once_a_week", "few_times_a_month",
]
FREQUENCY_WEIGHTS = [0.06, 0.20, 0.22, 0.24, 0.16, 0.12]


def make_routine(rng: random.Random, ordinal: int) -> dict:
    trigger, action_pools = TEMPLATES[rng.randrange(len(TEMPLATES))]
    actions = list(action_pools[rng.randrange(len(action_pools))])
    slug = trigger.split(",")[0]
    return {
        "id": f"r{ordinal:02d}_{slug}",
        "trigger": trigger,
        "actions": actions,
        "indicators": {
            "time_range": rng.choice(TIME_RANGES),
            "day_range": rng.choices(DAY_RANGES, weights=DAY_RANGE_WEIGHTS)[0],
            "frequency": rng.choices(FREQUENCIES, weights=FREQUENCY_WEIGHTS)[0],
        },
    }


def main() -> None:
    vocab: Vocabulary = load_vocabulary((DATA_DIR / "vocabulary.tsv").read_text())
    rng = random.Random(SEED)

    users = []
    total_routines = 0
    for u in range(NUM_USERS):
        count = rng.randint(5, 9)
        routines = [make_routine(rng, i) for i in range(count)]
        total_routines += count
        users.append({"id": f"user{u:02d}", "routines": routines})
    cohort = {"users": users}

    cohort_path = DATA_DIR / "demo_users.json"
    cohort_path.write_text(json.dumps(cohort, indent=1) + "\n")

    # Small single-user file for docs and quick CLI runs.
    single = users[0]["routines"]
    (DATA_DIR / "demo_routines.json").write_text(json.dumps(single, indent=1) + "\n")

    # Validate and report the corpus scale the cohort produces.
    loaded = load_user_routines(cohort_path.read_text(), vocab)
    corpus = corpus_from_users(loaded, days=ScheduleConfig().days, base_seed=0)
    print(f"users: {len(loaded)}  routines: {total_routines}")
    print(f"sequences: {len(corpus.sequences)}  events: {corpus.total_events()}")


if __name__ == "__main__":
    main()
