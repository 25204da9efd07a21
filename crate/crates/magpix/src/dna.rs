//! Translation of binary encodings into quaternary DNA edge codes with
//! overhang/vacancy layouts and Watson-Crick complementarity.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Most features a tile edge can carry.
pub const MAX_EDGE_FEATURES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Base {
    A,
    T,
    G,
    C,
}

impl Base {
    pub fn to_char(self) -> char {
        match self {
            Base::A => 'A',
            Base::T => 'T',
            Base::G => 'G',
            Base::C => 'C',
        }
    }

    pub fn from_char(c: char) -> Result<Self> {
        match c {
            'A' => Ok(Base::A),
            'T' => Ok(Base::T),
            'G' => Ok(Base::G),
            'C' => Ok(Base::C),
            other => Err(Error::InvalidInput(format!(
                "base {other:?} outside A, T, G, C"
            ))),
        }
    }

    /// Watson-Crick partner: A<->T, C<->G.
    pub fn pair(self) -> Self {
        match self {
            Base::A => Base::T,
            Base::T => Base::A,
            Base::G => Base::C,
            Base::C => Base::G,
        }
    }
}

/// A string over the quaternary alphabet {A, T, G, C}.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct QuaternaryString(pub Vec<Base>);

impl QuaternaryString {
    pub fn parse(s: &str) -> Result<Self> {
        s.chars().map(Base::from_char).collect::<Result<Vec<_>>>().map(Self)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for QuaternaryString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{}", b.to_char())?;
        }
        Ok(())
    }
}

impl Serialize for QuaternaryString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Reverse complement: reverse the order and pair every base. An involution.
pub fn complement(s: &QuaternaryString) -> QuaternaryString {
    QuaternaryString(s.0.iter().rev().map(|b| b.pair()).collect())
}

/// Maps pairs of binary pixels to one base: (+1,+1) A, (+1,-1) T,
/// (-1,+1) C, (-1,-1) G. The row length must be even and zero-free.
pub fn binary_to_quaternary(row: &[i8]) -> Result<QuaternaryString> {
    if row.len() % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "row length {} is odd; pixels map to bases in pairs",
            row.len()
        )));
    }
    row.chunks(2)
        .map(|pair| match (pair[0], pair[1]) {
            (1, 1) => Ok(Base::A),
            (1, -1) => Ok(Base::T),
            (-1, 1) => Ok(Base::C),
            (-1, -1) => Ok(Base::G),
            _ => Err(Error::NotBinary),
        })
        .collect::<Result<Vec<_>>>()
        .map(QuaternaryString)
}

/// Inverse of `binary_to_quaternary`.
pub fn quaternary_to_binary(s: &QuaternaryString) -> Vec<i8> {
    s.0.iter()
        .flat_map(|b| match b {
            Base::A => [1, 1],
            Base::T => [1, -1],
            Base::C => [-1, 1],
            Base::G => [-1, -1],
        })
        .collect()
}

/// Which rule a tile edge is built with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeRole {
    /// An overhang for each 1 bit.
    OverhangSide,
    /// A vacancy for each 0 bit, expecting the complement sequence.
    VacancySide,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EdgeFeature {
    Overhang { sequence: QuaternaryString },
    Vacancy { expected: QuaternaryString },
    Absent,
}

/// One tile edge: an ordered feature layout built from a bit code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgeCode {
    pub role: EdgeRole,
    pub features: Vec<EdgeFeature>,
}

/// Builds an edge from a bit code over a pool of distinct sequences.
/// Overhang sides present `pool[i]` at every 1; vacancy sides present the
/// complement of `pool[i]` at every 0.
pub fn edge_from_binary(
    code: &[bool],
    role: EdgeRole,
    pool: &[QuaternaryString],
) -> Result<EdgeCode> {
    if code.len() > MAX_EDGE_FEATURES {
        return Err(Error::Capacity {
            what: "edge features",
            limit: MAX_EDGE_FEATURES,
            requested: code.len(),
        });
    }
    if pool.len() < code.len() {
        return Err(Error::Capacity {
            what: "sequence pool",
            limit: code.len(),
            requested: pool.len(),
        });
    }
    let used = &pool[..code.len()];
    for (i, s) in used.iter().enumerate() {
        if s.is_empty() {
            return Err(Error::InvalidInput(format!("pool sequence {i} is empty")));
        }
        if used[..i].contains(s) {
            return Err(Error::InvalidInput(format!(
                "pool sequences must be pairwise distinct ({s} repeats)"
            )));
        }
    }
    let features = code
        .iter()
        .enumerate()
        .map(|(i, &bit)| match role {
            EdgeRole::OverhangSide if bit => EdgeFeature::Overhang {
                sequence: pool[i].clone(),
            },
            EdgeRole::VacancySide if !bit => EdgeFeature::Vacancy {
                expected: complement(&pool[i]),
            },
            _ => EdgeFeature::Absent,
        })
        .collect();
    Ok(EdgeCode { role, features })
}

/// Positions where one edge's overhang meets the other's vacancy and the
/// vacancy expects exactly the overhang's reverse complement.
pub fn binding_score(e1: &EdgeCode, e2: &EdgeCode) -> Result<usize> {
    if e1.features.len() != e2.features.len() {
        return Err(Error::DimensionMismatch {
            expected: e1.features.len(),
            got: e2.features.len(),
        });
    }
    Ok(e1
        .features
        .iter()
        .zip(&e2.features)
        .filter(|(a, b)| match (a, b) {
            (EdgeFeature::Overhang { sequence }, EdgeFeature::Vacancy { expected })
            | (EdgeFeature::Vacancy { expected }, EdgeFeature::Overhang { sequence }) => {
                *expected == complement(sequence)
            }
            _ => false,
        })
        .count())
}

/// Converts a binary pixel row to edge bits: +1 is 1, -1 is 0.
pub fn bits_from_row(row: &[i8]) -> Result<Vec<bool>> {
    row.iter()
        .map(|&c| match c {
            1 => Ok(true),
            -1 => Ok(false),
            _ => Err(Error::NotBinary),
        })
        .collect()
}

/// Parses a pool file: one uppercase ACGT sequence per line.
pub fn parse_pool(text: &str) -> Result<Vec<QuaternaryString>> {
    let mut pool = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            return Err(Error::Parse {
                line: i + 1,
                msg: "empty pool line".into(),
            });
        }
        let seq = QuaternaryString::parse(line).map_err(|e| Error::Parse {
            line: i + 1,
            msg: e.to_string(),
        })?;
        pool.push(seq);
    }
    if pool.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "pool file has no sequences".into(),
        });
    }
    Ok(pool)
}

pub fn read_pool_file(path: impl AsRef<std::path::Path>) -> Result<Vec<QuaternaryString>> {
    parse_pool(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> QuaternaryString {
        QuaternaryString::parse(s).unwrap()
    }

    #[test]
    fn reverse_complement_examples() {
        assert_eq!(complement(&q("ATGC")), q("GCAT"));
        assert_eq!(complement(&q("")), q(""));
        assert_eq!(complement(&q("AAAA")), q("TTTT"));
    }

    #[test]
    fn complement_is_involution() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let bases = [Base::A, Base::T, Base::G, Base::C];
        for _ in 0..500 {
            let len = rng.gen_range(0..40);
            let s = QuaternaryString((0..len).map(|_| *bases.choose(&mut rng).unwrap()).collect());
            assert_eq!(complement(&complement(&s)), s);
        }
    }

    #[test]
    fn pixel_pairs_to_bases() {
        assert_eq!(binary_to_quaternary(&[1, 1, -1, -1]).unwrap(), q("AG"));
        assert_eq!(
            binary_to_quaternary(&[1, 1, 1, -1, -1, 1, -1, -1]).unwrap(),
            q("ATCG")
        );
        assert!(binary_to_quaternary(&[1, -1, 1]).is_err());
        assert!(binary_to_quaternary(&[1, 0]).is_err());
    }

    #[test]
    fn quaternary_round_trip() {
        for row in [
            vec![1i8, 1],
            vec![1, -1, -1, 1],
            vec![-1, -1, -1, -1, 1, 1],
        ] {
            let s = binary_to_quaternary(&row).unwrap();
            assert_eq!(quaternary_to_binary(&s), row);
        }
    }

    #[test]
    fn hadamard_row_translates_cell_by_cell() {
        let h = crate::matrix::sylvester(3).unwrap();
        let row: Vec<i8> = (0..8).map(|j| h.get(1, j)).collect();
        assert_eq!(row, vec![1, -1, 1, -1, 1, -1, 1, -1]);
        assert_eq!(binary_to_quaternary(&row).unwrap(), q("TTTT"));
    }

    fn pool3() -> Vec<QuaternaryString> {
        vec![q("ACGT"), q("TTAA"), q("GGCC")]
    }

    #[test]
    fn literal_edge_rules() {
        let code = [true, false, true];
        let over = edge_from_binary(&code, EdgeRole::OverhangSide, &pool3()).unwrap();
        assert!(matches!(over.features[0], EdgeFeature::Overhang { .. }));
        assert_eq!(over.features[1], EdgeFeature::Absent);
        assert!(matches!(over.features[2], EdgeFeature::Overhang { .. }));

        let vac = edge_from_binary(&code, EdgeRole::VacancySide, &pool3()).unwrap();
        assert_eq!(vac.features[0], EdgeFeature::Absent);
        assert!(matches!(vac.features[1], EdgeFeature::Vacancy { .. }));
        assert_eq!(vac.features[2], EdgeFeature::Absent);

        // the literal rule leaves a code and its own vacancy edge disjoint:
        // overhangs sit at 1s, vacancies at 0s, so nothing lines up
        assert_eq!(binding_score(&over, &vac).unwrap(), 0);
    }

    #[test]
    fn inverted_code_vacancy_edge_binds_every_one_bit() {
        let code = [true, false, true];
        let inverted: Vec<bool> = code.iter().map(|b| !b).collect();
        let over = edge_from_binary(&code, EdgeRole::OverhangSide, &pool3()).unwrap();
        let vac = edge_from_binary(&inverted, EdgeRole::VacancySide, &pool3()).unwrap();
        let ones = code.iter().filter(|&&b| b).count();
        assert_eq!(binding_score(&over, &vac).unwrap(), ones);
        assert_eq!(binding_score(&vac, &over).unwrap(), ones);
    }

    #[test]
    fn ten_overhangs_bind_ten_vacancies() {
        let bases = [Base::A, Base::T, Base::G, Base::C];
        let pool: Vec<QuaternaryString> = (0..10)
            .map(|i| {
                QuaternaryString(vec![bases[i % 4], bases[(i / 4) % 4], bases[(i / 2) % 4]])
            })
            .collect();
        let all_ones = [true; 10];
        let all_zeros = [false; 10];
        let over = edge_from_binary(&all_ones, EdgeRole::OverhangSide, &pool).unwrap();
        let vac = edge_from_binary(&all_zeros, EdgeRole::VacancySide, &pool).unwrap();
        assert_eq!(binding_score(&over, &vac).unwrap(), 10);

        let absent = edge_from_binary(&all_zeros, EdgeRole::OverhangSide, &pool).unwrap();
        assert!(absent.features.iter().all(|f| *f == EdgeFeature::Absent));
        assert_eq!(binding_score(&absent, &vac).unwrap(), 0);
    }

    #[test]
    fn edge_capacity_and_pool_checks() {
        let code = [true; 11];
        assert!(matches!(
            edge_from_binary(&code, EdgeRole::OverhangSide, &pool3()),
            Err(Error::Capacity { .. })
        ));
        let code = [true; 3];
        assert!(matches!(
            edge_from_binary(&code, EdgeRole::OverhangSide, &pool3()[..2]),
            Err(Error::Capacity { .. })
        ));
        let dup = vec![q("ACGT"), q("ACGT"), q("GGCC")];
        assert!(edge_from_binary(&code, EdgeRole::OverhangSide, &dup).is_err());
        let mismatched = edge_from_binary(&[true], EdgeRole::OverhangSide, &pool3()).unwrap();
        let three = edge_from_binary(&code, EdgeRole::OverhangSide, &pool3()).unwrap();
        assert!(binding_score(&mismatched, &three).is_err());
    }

    #[test]
    fn binding_matches_positional_brute_force() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let bases = [Base::A, Base::T, Base::G, Base::C];
        for _ in 0..50 {
            let len = rng.gen_range(1..=6);
            let mut pool: Vec<QuaternaryString> = Vec::new();
            while pool.len() < len {
                let s = QuaternaryString(
                    (0..4).map(|_| *bases.choose(&mut rng).unwrap()).collect(),
                );
                if !pool.contains(&s) {
                    pool.push(s);
                }
            }
            let mut shuffled = pool.clone();
            shuffled.shuffle(&mut rng);
            let code: Vec<bool> = (0..len).map(|_| rng.gen()).collect();
            let e1 = edge_from_binary(&code, EdgeRole::OverhangSide, &pool).unwrap();
            let e2 = edge_from_binary(&code, EdgeRole::VacancySide, &shuffled).unwrap();
            let mut expected = 0;
            for i in 0..len {
                if let (
                    EdgeFeature::Overhang { sequence },
                    EdgeFeature::Vacancy { expected: want },
                ) = (&e1.features[i], &e2.features[i])
                {
                    if *want == complement(sequence) {
                        expected += 1;
                    }
                }
            }
            assert_eq!(binding_score(&e1, &e2).unwrap(), expected);
        }
    }

    #[test]
    fn bits_from_row_mapping() {
        assert_eq!(bits_from_row(&[1, -1, 1]).unwrap(), vec![true, false, true]);
        assert!(bits_from_row(&[1, 0]).is_err());
    }

    #[test]
    fn pool_parsing() {
        let pool = parse_pool("ACGT\nTTAA\n").unwrap();
        assert_eq!(pool.len(), 2);
        assert!(parse_pool("acgt\n").is_err());
        assert!(parse_pool("ACGT\n\nTTAA\n").is_err());
        assert!(parse_pool("").is_err());
        assert!(parse_pool("ACGU\n").is_err());
    }
}
