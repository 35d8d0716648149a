//! The 8x8x8 magic cube and its periodic 256^3 expansion.
//!
//! Every cell holds a value in 0..=63. Validity means all 24 axis-aligned
//! 8x8 planes and all 8 aligned 4x4x4 sub-cubes are permutations of 0..=63.
//! Those two families of constraints are exactly what make the four search
//! patterns total: any mod-8-complete 8x8 window of a plane, and any aligned
//! 4-block, contains every value exactly once.

use std::fmt;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Cube edge length.
pub const CUBE_DIM: usize = 8;

/// Number of distinct cell values (0..=63).
pub const VALUE_COUNT: usize = 64;

/// A coordinate in the periodically expanded 256^3 index space.
///
/// Components are full-range `u8`, so every representable coordinate is
/// valid; wrap-around arithmetic is the intended semantics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Coord3 {
    pub x: u8,
    pub y: u8,
    pub z: u8,
}

impl Coord3 {
    pub fn new(x: u8, y: u8, z: u8) -> Self {
        Self { x, y, z }
    }

    /// Squared Euclidean distance to `other` under periodic (mod 256)
    /// indexing: each axis uses the minimal-magnitude residue.
    pub fn sq_distance(&self, other: &Coord3) -> u32 {
        let d = |a: u8, b: u8| -> i32 {
            let raw = (i32::from(a) - i32::from(b)).rem_euclid(256);
            if raw > 128 {
                raw - 256
            } else {
                raw
            }
        };
        let dx = d(self.x, other.x);
        let dy = d(self.y, other.y);
        let dz = d(self.z, other.z);
        (dx * dx + dy * dy + dz * dz) as u32
    }
}

impl fmt::Display for Coord3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// One hit of a search pattern: where the key was found and how far away.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternMatch {
    /// Which pattern produced the hit (1..=4).
    pub pattern_id: u8,
    pub coord: Coord3,
    pub sq_distance: u32,
}

/// A single plane or sub-cube permutation constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    /// The 8x8 plane with fixed x == .0.
    PlaneX(u8),
    /// The 8x8 plane with fixed y == .0.
    PlaneY(u8),
    /// The 8x8 plane with fixed z == .0.
    PlaneZ(u8),
    /// The aligned 4x4x4 block with corner at (x0, y0, z0), each in {0, 4}.
    SubCube { x0: u8, y0: u8, z0: u8 },
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::PlaneX(i) => write!(f, "plane x={i}"),
            Constraint::PlaneY(i) => write!(f, "plane y={i}"),
            Constraint::PlaneZ(i) => write!(f, "plane z={i}"),
            Constraint::SubCube { x0, y0, z0 } => {
                write!(f, "sub-cube at ({x0}, {y0}, {z0})")
            }
        }
    }
}

/// Outcome of checking all 32 permutation constraints.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Constraint>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Total number of constraints checked (24 planes + 8 sub-cubes).
    pub fn checked(&self) -> usize {
        32
    }

    pub fn satisfied(&self) -> usize {
        self.checked() - self.violations.len()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{} constraints satisfied", self.satisfied(), self.checked())?;
        for v in &self.violations {
            write!(f, "\n  violated: {v}")?;
        }
        Ok(())
    }
}

/// Errors from matrix queries.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MagicError {
    #[error("key {0} out of range 0..=63")]
    KeyOutOfRange(u8),
}

/// The 8x8x8 cube plus the seed that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MagicMatrix {
    cells: [[[u8; CUBE_DIM]; CUBE_DIM]; CUBE_DIM],
    seed: u64,
}

/// Base cell value before relabeling.
///
/// Coordinates decompose into high/low base-4 digits h = c / 4, l = c % 4;
/// the value's base-4 digits are cyclic shifts mixing the low digit of one
/// axis with the high digits of all three. Each plane and each aligned
/// sub-cube then maps bijectively onto the 64 values.
fn base_value(x: usize, y: usize, z: usize) -> u8 {
    let (xh, xl) = (x / 4, x % 4);
    let (yh, yl) = (y / 4, y % 4);
    let (zh, zl) = (z / 4, z % 4);
    let d2 = (xl + 2 * yh + zh + xh) % 4;
    let d1 = (yl + 2 * xh + zh + yh) % 4;
    let d0 = (zl + 2 * xh + yh + zh) % 4;
    (16 * d2 + 4 * d1 + d0) as u8
}

impl MagicMatrix {
    /// Deterministically construct a valid cube from a seed.
    ///
    /// The seed drives a Fisher-Yates permutation of the value alphabet
    /// applied on top of the fixed base construction; relabeling preserves
    /// every permutation constraint, so all seeds yield valid cubes. The
    /// seed doubles as the shared stego key.
    pub fn generate(seed: u64) -> Self {
        let mut relabel: [u8; VALUE_COUNT] = [0; VALUE_COUNT];
        for (i, v) in relabel.iter_mut().enumerate() {
            *v = i as u8;
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        for i in (1..VALUE_COUNT).rev() {
            let j = (rng.next_u64() % (i as u64 + 1)) as usize;
            relabel.swap(i, j);
        }

        let mut cells = [[[0u8; CUBE_DIM]; CUBE_DIM]; CUBE_DIM];
        for (x, plane) in cells.iter_mut().enumerate() {
            for (y, row) in plane.iter_mut().enumerate() {
                for (z, cell) in row.iter_mut().enumerate() {
                    *cell = relabel[base_value(x, y, z) as usize];
                }
            }
        }
        Self { cells, seed }
    }

    /// Rebuild from raw parts (e.g. a container file). No validation here;
    /// callers that need a valid cube must run [`MagicMatrix::validate`].
    pub fn from_parts(cells: [[[u8; CUBE_DIM]; CUBE_DIM]; CUBE_DIM], seed: u64) -> Self {
        Self { cells, seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn cells(&self) -> &[[[u8; CUBE_DIM]; CUBE_DIM]; CUBE_DIM] {
        &self.cells
    }

    /// Base-cube lookup, coordinates already reduced to 0..=7.
    pub fn cell(&self, x: usize, y: usize, z: usize) -> u8 {
        self.cells[x][y][z]
    }

    /// Check all 24 plane constraints and 8 sub-cube constraints, naming
    /// each violated one. Failure is a report, not an error.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();

        let mut check = |cells: &mut dyn Iterator<Item = u8>, c: Constraint| {
            let mut seen = [false; VALUE_COUNT];
            let mut ok = true;
            for v in cells {
                let v = v as usize;
                if v >= VALUE_COUNT || seen[v] {
                    ok = false;
                    break;
                }
                seen[v] = true;
            }
            if !ok {
                violations.push(c);
            }
        };

        for i in 0..CUBE_DIM {
            let mut it = (0..CUBE_DIM).flat_map(|y| (0..CUBE_DIM).map(move |z| (y, z)));
            check(
                &mut it.by_ref().map(|(y, z)| self.cells[i][y][z]),
                Constraint::PlaneX(i as u8),
            );
            let mut it = (0..CUBE_DIM).flat_map(|x| (0..CUBE_DIM).map(move |z| (x, z)));
            check(
                &mut it.by_ref().map(|(x, z)| self.cells[x][i][z]),
                Constraint::PlaneY(i as u8),
            );
            let mut it = (0..CUBE_DIM).flat_map(|x| (0..CUBE_DIM).map(move |y| (x, y)));
            check(
                &mut it.by_ref().map(|(x, y)| self.cells[x][y][i]),
                Constraint::PlaneZ(i as u8),
            );
        }

        for &x0 in &[0usize, 4] {
            for &y0 in &[0usize, 4] {
                for &z0 in &[0usize, 4] {
                    let mut it = (0..4)
                        .flat_map(|i| (0..4).flat_map(move |j| (0..4).map(move |k| (i, j, k))));
                    check(
                        &mut it
                            .by_ref()
                            .map(|(i, j, k)| self.cells[x0 + i][y0 + j][z0 + k]),
                        Constraint::SubCube {
                            x0: x0 as u8,
                            y0: y0 as u8,
                            z0: z0 as u8,
                        },
                    );
                }
            }
        }

        ValidationReport { violations }
    }

    /// Value of the periodic expansion at an arbitrary 256^3 coordinate:
    /// the base cell at (x mod 8, y mod 8, z mod 8).
    pub fn expand(&self, c: Coord3) -> u8 {
        self.cells[(c.x % 8) as usize][(c.y % 8) as usize][(c.z % 8) as usize]
    }

    /// Locate `key` near `origin` with each of the four search patterns.
    ///
    /// Patterns 1-3 scan the 8x8 window of the plane through `origin` with
    /// x, y, z fixed respectively (offsets -3..=+4 on the two free axes);
    /// pattern 4 scans the aligned 4x4x4 block containing `origin`. Window
    /// coordinates wrap mod 256. A valid cube guarantees each pattern holds
    /// every value exactly once, so each yields exactly one match.
    pub fn search_patterns(
        &self,
        origin: Coord3,
        key: u8,
    ) -> Result<[PatternMatch; 4], MagicError> {
        if key as usize >= VALUE_COUNT {
            return Err(MagicError::KeyOutOfRange(key));
        }

        let window = |c: u8| (0..8u8).map(move |i| c.wrapping_sub(3).wrapping_add(i));
        let block = |c: u8| {
            let start = (c / 4) * 4;
            (0..4u8).map(move |i| start + i)
        };

        let find = |pattern_id: u8, coords: &mut dyn Iterator<Item = Coord3>| -> PatternMatch {
            let mut found: Option<Coord3> = None;
            for c in coords {
                if self.expand(c) == key {
                    assert!(
                        found.is_none(),
                        "pattern {pattern_id} matched key {key} twice; cube invariant broken"
                    );
                    found = Some(c);
                }
            }
            let coord = found.unwrap_or_else(|| {
                panic!("pattern {pattern_id} found no match for key {key}; cube invariant broken")
            });
            PatternMatch {
                pattern_id,
                coord,
                sq_distance: coord.sq_distance(&origin),
            }
        };

        let p1 = find(
            1,
            &mut window(origin.y)
                .flat_map(|y| window(origin.z).map(move |z| Coord3::new(origin.x, y, z))),
        );
        let p2 = find(
            2,
            &mut window(origin.x)
                .flat_map(|x| window(origin.z).map(move |z| Coord3::new(x, origin.y, z))),
        );
        let p3 = find(
            3,
            &mut window(origin.x)
                .flat_map(|x| window(origin.y).map(move |y| Coord3::new(x, y, origin.z))),
        );
        let p4 = find(
            4,
            &mut block(origin.x).flat_map(|x| {
                block(origin.y).flat_map(move |y| block(origin.z).map(move |z| Coord3::new(x, y, z)))
            }),
        );

        Ok([p1, p2, p3, p4])
    }
}
