//! MovieLens-style ratings into a word-of-mouth coverage instance.
//!
//! Attraction of movie `i` for user `j` is
//! `0.2 * <g_i/|g_i|, u_j/|u_j|> * r_i / max r`, where `g_i` is the movie's
//! binary genre vector, `r_i` its average rating, and `u_j` the mean genre
//! vector of the selected movies the user rated plus half-normal noise.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Read;
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::env::PmcInstance;
use crate::error::{Error, Result};
use crate::model::MeanVector;

/// Genre slots, in vector order.
pub const GENRES: [&str; 20] = [
    "Action",
    "Adventure",
    "Animation",
    "Children",
    "Comedy",
    "Crime",
    "Documentary",
    "Drama",
    "Fantasy",
    "Film-Noir",
    "Horror",
    "IMAX",
    "Musical",
    "Mystery",
    "Romance",
    "Sci-Fi",
    "Thriller",
    "War",
    "Western",
    "(no genres listed)",
];

/// Scale factor applied to the aligned-preference score.
pub const ATTRACTION_SCALE: f64 = 0.2;

pub type GenreVector = [bool; 20];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rating {
    pub user: u64,
    pub movie: u64,
    pub rating: f64,
    pub timestamp: i64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RatingsTable {
    pub ratings: Vec<Rating>,
    pub genres: HashMap<u64, GenreVector>,
}

fn line_err(path: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::IngestLine {
        path: path.to_string(),
        line,
        msg: msg.into(),
    }
}

fn parse_genres(label: &str) -> Option<GenreVector> {
    let mut g = [false; 20];
    for part in label.split('|') {
        let slot = GENRES.iter().position(|&name| name == part.trim())?;
        g[slot] = true;
    }
    Some(g)
}

impl RatingsTable {
    pub fn from_paths(ratings: &Path, movies: &Path) -> Result<Self> {
        let open = |p: &Path| std::fs::File::open(p).map_err(|e| Error::Ingest(format!("{}: {e}", p.display())));
        Self::from_readers(
            open(ratings)?,
            &ratings.display().to_string(),
            open(movies)?,
            &movies.display().to_string(),
        )
    }

    /// Reads `userId,movieId,rating,timestamp` and `movieId,title,genres`
    /// tables, both with a header row.
    pub fn from_readers<R1: Read, R2: Read>(ratings: R1, ratings_name: &str, movies: R2, movies_name: &str) -> Result<Self> {
        let mut table = RatingsTable::default();
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(ratings);
        for (idx, rec) in rdr.records().enumerate() {
            let line = idx + 2;
            let rec = rec.map_err(|e| line_err(ratings_name, line, e.to_string()))?;
            if rec.len() < 4 {
                return Err(line_err(ratings_name, line, format!("expected 4 columns, found {}", rec.len())));
            }
            let field = |i: usize| rec[i].trim();
            let user = field(0).parse().map_err(|_| line_err(ratings_name, line, "bad userId"))?;
            let movie = field(1).parse().map_err(|_| line_err(ratings_name, line, "bad movieId"))?;
            let rating: f64 = field(2).parse().map_err(|_| line_err(ratings_name, line, "bad rating"))?;
            if !rating.is_finite() || rating < 0.0 {
                return Err(line_err(ratings_name, line, format!("rating {rating} is not a non-negative number")));
            }
            let timestamp = field(3).parse().map_err(|_| line_err(ratings_name, line, "bad timestamp"))?;
            table.ratings.push(Rating {
                user,
                movie,
                rating,
                timestamp,
            });
        }
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(movies);
        for (idx, rec) in rdr.records().enumerate() {
            let line = idx + 2;
            let rec = rec.map_err(|e| line_err(movies_name, line, e.to_string()))?;
            if rec.len() < 3 {
                return Err(line_err(movies_name, line, format!("expected 3 columns, found {}", rec.len())));
            }
            let movie = rec[0].trim().parse().map_err(|_| line_err(movies_name, line, "bad movieId"))?;
            let g = parse_genres(&rec[rec.len() - 1])
                .ok_or_else(|| line_err(movies_name, line, format!("unknown genre in '{}'", &rec[rec.len() - 1])))?;
            table.genres.insert(movie, g);
        }
        Ok(table)
    }
}

/// How the 0.05 noise parameter is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseScale {
    /// `N(0, s)` with `s` the variance.
    #[default]
    Variance,
    /// `N(0, s)` with `s` the standard deviation.
    StdDev,
}

fn default_window_start() -> i64 {
    MovielensParams::DEFAULT_WINDOW.0
}
fn default_window_end() -> i64 {
    MovielensParams::DEFAULT_WINDOW.1
}
fn default_count() -> usize {
    10
}
fn default_noise() -> f64 {
    0.05
}
fn default_k() -> usize {
    3
}
fn default_p_star() -> f64 {
    0.05
}

/// Construction parameters. Timestamps are seconds since the Unix epoch and
/// the window is half-open `[window_start, window_end)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MovielensParams {
    #[serde(default = "default_window_start")]
    pub window_start: i64,
    #[serde(default = "default_window_end")]
    pub window_end: i64,
    #[serde(default = "default_count")]
    pub most_rated: usize,
    #[serde(default = "default_count")]
    pub least_rated: usize,
    #[serde(default = "default_count")]
    pub random: usize,
    /// Keep at most this many users, sampled uniformly.
    #[serde(default)]
    pub w_cap: Option<usize>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_p_star")]
    pub p_star: f64,
    #[serde(default = "default_noise")]
    pub noise: f64,
    #[serde(default)]
    pub noise_scale: NoiseScale,
    #[serde(default)]
    pub seed: u64,
}

impl Default for MovielensParams {
    fn default() -> Self {
        Self::new(Self::DEFAULT_WINDOW.0, Self::DEFAULT_WINDOW.1)
    }
}

impl MovielensParams {
    /// March 2014 to March 2015.
    pub const DEFAULT_WINDOW: (i64, i64) = (1_393_632_000, 1_425_168_000);

    pub fn new(window_start: i64, window_end: i64) -> Self {
        MovielensParams {
            window_start,
            window_end,
            most_rated: 10,
            least_rated: 10,
            random: 10,
            w_cap: None,
            k: default_k(),
            p_star: default_p_star(),
            noise: default_noise(),
            noise_scale: NoiseScale::Variance,
            seed: 0,
        }
    }

    fn noise_std(&self) -> f64 {
        match self.noise_scale {
            NoiseScale::Variance => self.noise.sqrt(),
            NoiseScale::StdDev => self.noise,
        }
    }
}

/// Result of ingestion: the instance and which ids its rows and columns are.
#[derive(Debug, Clone, PartialEq)]
pub struct MovielensInstance {
    pub instance: PmcInstance,
    /// Movie id of each item index.
    pub movies: Vec<u64>,
    /// User id of each user index.
    pub users: Vec<u64>,
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// Item selection: the most-rated movies (ties to lower id), then the
/// least-rated among the rest, then a seeded uniform sample of the remainder.
fn select_movies(counts: &BTreeMap<u64, usize>, p: &MovielensParams, rng: &mut ChaCha8Rng) -> Result<Vec<u64>> {
    let want = p.most_rated + p.least_rated + p.random;
    if counts.len() < want {
        return Err(Error::Ingest(format!(
            "window holds {} rated movies, {want} required",
            counts.len()
        )));
    }
    let mut by_count: Vec<(u64, usize)> = counts.iter().map(|(&m, &c)| (m, c)).collect();
    by_count.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut chosen: Vec<u64> = by_count[..p.most_rated].iter().map(|x| x.0).collect();
    let taken: BTreeSet<u64> = chosen.iter().copied().collect();
    let mut rest: Vec<(u64, usize)> = by_count.into_iter().filter(|x| !taken.contains(&x.0)).collect();
    rest.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)));
    chosen.extend(rest[..p.least_rated].iter().map(|x| x.0));
    let mut pool: Vec<u64> = rest[p.least_rated..].iter().map(|x| x.0).collect();
    pool.sort_unstable();
    chosen.extend(pool.choose_multiple(rng, p.random).copied().collect::<BTreeSet<_>>());
    Ok(chosen)
}

pub fn build_movielens_instance(table: &RatingsTable, p: &MovielensParams) -> Result<MovielensInstance> {
    if p.window_start >= p.window_end {
        return Err(Error::Ingest("empty date window".into()));
    }
    let window: Vec<&Rating> = table
        .ratings
        .iter()
        .filter(|r| r.timestamp >= p.window_start && r.timestamp < p.window_end)
        .collect();
    if window.is_empty() {
        return Err(Error::Ingest("no ratings inside the date window".into()));
    }
    let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
    for r in &window {
        *counts.entry(r.movie).or_default() += 1;
    }

    let mut movie_rng = ChaCha8Rng::seed_from_u64(p.seed);
    movie_rng.set_stream(1);
    let movies = select_movies(&counts, p, &mut movie_rng)?;
    let v = movies.len();
    if p.k == 0 || p.k > v {
        return Err(Error::config(format!("K = {} not in 1..={v}", p.k)));
    }
    let index: HashMap<u64, usize> = movies.iter().enumerate().map(|(i, &m)| (m, i)).collect();

    let mut genre = Vec::with_capacity(v);
    for &m in &movies {
        let g = table
            .genres
            .get(&m)
            .ok_or_else(|| Error::Ingest(format!("no genre data for movie {m}")))?;
        if !g.iter().any(|&b| b) {
            return Err(Error::Ingest(format!("movie {m} has an empty genre vector")));
        }
        genre.push(g.map(|b| if b { 1.0 } else { 0.0 }));
    }

    let mut sum = vec![0.0; v];
    let mut n = vec![0usize; v];
    let mut rated: BTreeMap<u64, BTreeSet<usize>> = BTreeMap::new();
    for r in &window {
        if let Some(&i) = index.get(&r.movie) {
            sum[i] += r.rating;
            n[i] += 1;
            rated.entry(r.user).or_default().insert(i);
        }
    }
    let avg: Vec<f64> = sum.iter().zip(&n).map(|(s, &c)| s / c as f64).collect();
    let max_avg = avg.iter().copied().fold(0.0, f64::max);
    if max_avg <= 0.0 {
        return Err(Error::Ingest("all selected movies average a zero rating".into()));
    }

    let mut users: Vec<u64> = rated.keys().copied().collect();
    if let Some(cap) = p.w_cap {
        if cap == 0 {
            return Err(Error::config("w_cap must be positive"));
        }
        if users.len() > cap {
            let mut user_rng = ChaCha8Rng::seed_from_u64(p.seed);
            user_rng.set_stream(2);
            users.shuffle(&mut user_rng);
            users.truncate(cap);
            users.sort_unstable();
        }
    }

    let mut unit_genre = genre.clone();
    unit_genre.iter_mut().for_each(|g| normalize(g));

    let std = p.noise_std();
    let noise = if std > 0.0 {
        Some(Normal::new(0.0, std).map_err(|e| Error::config(format!("noise: {e}")))?)
    } else {
        None
    };
    let mut noise_rng = ChaCha8Rng::seed_from_u64(p.seed);
    noise_rng.set_stream(3);

    let w = users.len();
    let mut attraction = vec![0.0; v * w];
    for (j, u) in users.iter().enumerate() {
        let seen = &rated[u];
        let mut pref = [0.0f64; 20];
        for &i in seen {
            for (acc, g) in pref.iter_mut().zip(&genre[i]) {
                *acc += g;
            }
        }
        for x in pref.iter_mut() {
            *x /= seen.len() as f64;
            if let Some(d) = &noise {
                *x += d.sample(&mut noise_rng).abs();
            }
        }
        normalize(&mut pref);
        for i in 0..v {
            let cos: f64 = unit_genre[i].iter().zip(&pref).map(|(a, b)| a * b).sum();
            let val = ATTRACTION_SCALE * cos * avg[i] / max_avg;
            attraction[j * v + i] = val.clamp(0.0, ATTRACTION_SCALE);
        }
    }

    let instance = PmcInstance::new(v, w, p.k, MeanVector::new(attraction)?, p.p_star)?;
    Ok(MovielensInstance {
        instance,
        movies,
        users,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(ratings: &str, movies: &str) -> RatingsTable {
        RatingsTable::from_readers(ratings.as_bytes(), "ratings.csv", movies.as_bytes(), "movies.csv").unwrap()
    }

    #[test]
    fn genre_parsing() {
        let g = parse_genres("Comedy|Drama").unwrap();
        assert!(g[4] && g[7]);
        assert_eq!(g.iter().filter(|&&b| b).count(), 2);
        assert!(parse_genres("Comedy|Space Opera").is_none());
    }

    #[test]
    fn malformed_rating_reports_line() {
        let err = RatingsTable::from_readers(
            "userId,movieId,rating,timestamp\n1,2,4.0,10\n1,x,3.0,11\n".as_bytes(),
            "r.csv",
            "movieId,title,genres\n".as_bytes(),
            "m.csv",
        )
        .unwrap_err();
        assert!(matches!(err, Error::IngestLine { line: 3, .. }), "{err}");
    }

    #[test]
    fn single_movie_user_aligns_with_that_movie() {
        let t = table(
            "userId,movieId,rating,timestamp\n1,10,4.0,5\n2,20,2.0,5\n2,10,5.0,6\n",
            "movieId,title,genres\n10,A,Comedy\n20,B,Drama|Comedy\n",
        );
        let mut p = MovielensParams::new(0, 100);
        p.most_rated = 2;
        p.least_rated = 0;
        p.random = 0;
        p.k = 1;
        p.noise = 0.0;
        let out = build_movielens_instance(&t, &p).unwrap();
        assert_eq!(out.movies, vec![10, 20]);
        assert_eq!(out.users, vec![1, 2]);
        // user 1 rated only movie 10: aligned, movie 10 averages 4.5 = max
        let a = out.instance.attraction();
        assert!((a[0] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn empty_window_and_missing_genres() {
        let t = table(
            "userId,movieId,rating,timestamp\n1,10,4.0,5\n",
            "movieId,title,genres\n",
        );
        let mut p = MovielensParams::new(0, 100);
        p.most_rated = 1;
        p.least_rated = 0;
        p.random = 0;
        p.k = 1;
        assert!(matches!(build_movielens_instance(&t, &p), Err(Error::Ingest(_))));
        let p = MovielensParams {
            window_start: 50,
            window_end: 60,
            ..p
        };
        assert!(matches!(build_movielens_instance(&t, &p), Err(Error::Ingest(_))));
    }
}
