#!/usr/bin/env python3
"""Write a small synthetic ratings/movies pair in the MovieLens CSV layout.

The tables are made up: popularity follows a Zipf-like law so the most and
least rated movies differ sharply, each movie carries one to three genres,
and a slice of ratings falls outside the default March 2014 - March 2015
window so date filtering has something to do.

    python3 scripts/make_movielens_fixture.py crates/core/tests/fixtures/movielens
"""

import random
import sys
from pathlib import Path

GENRES = [
    "Action", "Adventure", "Animation", "Children", "Comedy", "Crime",
    "Documentary", "Drama", "Fantasy", "Film-Noir", "Horror", "IMAX",
    "Musical", "Mystery", "Romance", "Sci-Fi", "Thriller", "War", "Western",
]

WINDOW = (1_393_632_000, 1_425_168_000)
N_MOVIES = 60
N_USERS = 900


def main(out_dir: Path, seed: int = 20140301) -> None:
    rng = random.Random(seed)
    out_dir.mkdir(parents=True, exist_ok=True)

    movies = []
    for m in range(1, N_MOVIES + 1):
        genres = rng.sample(GENRES, rng.choice([1, 1, 2, 2, 3]))
        quality = rng.uniform(2.0, 4.6)
        popularity = 1.0 / (m ** 1.1)
        movies.append((m * 7, f"Movie {m}", genres, quality, popularity))

    with open(out_dir / "movies.csv", "w", newline="") as f:
        f.write("movieId,title,genres\n")
        for mid, title, genres, _, _ in movies:
            f.write(f'{mid},"{title} ({1980 + mid % 35})",{"|".join(genres)}\n')

    weights = [p for *_, p in movies]
    rows = []
    for u in range(1, N_USERS + 1):
        taste = set(rng.sample(GENRES, 3))
        n = rng.randint(2, 18)
        seen = set()
        while len(seen) < n:
            seen.add(rng.choices(range(N_MOVIES), weights=weights)[0])
        for i in sorted(seen):
            mid, _, genres, quality, _ = movies[i]
            bonus = 0.4 * len(taste.intersection(genres))
            r = min(5.0, max(0.5, round((quality + bonus + rng.gauss(0, 0.6)) * 2) / 2))
            if rng.random() < 0.15:
                ts = rng.randint(WINDOW[0] - 300 * 86400, WINDOW[0] - 1)
            else:
                ts = rng.randint(*WINDOW)
            rows.append((u, mid, r, ts))

    # guarantee every movie has at least one rating inside the window
    for mid, *_ in movies:
        rows.append((N_USERS + 1, mid, 3.0, WINDOW[0] + mid))

    with open(out_dir / "ratings.csv", "w", newline="") as f:
        f.write("userId,movieId,rating,timestamp\n")
        for u, mid, r, ts in rows:
            f.write(f"{u},{mid},{r:.1f},{ts}\n")


if __name__ == "__main__":
    main(Path(sys.argv[1] if len(sys.argv) > 1 else "crates/core/tests/fixtures/movielens"))
