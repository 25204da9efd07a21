//! Mapping a compatible encoding set onto a target assembly's mating faces
//! and checking the agitation-force window.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::PixelMatrix;
use crate::scoring::{local_score, pair_score};

/// Cube face labels, outward normals along the lattice axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Face {
    PosX,
    NegX,
    PosY,
    NegY,
    PosZ,
    NegZ,
}

pub const ALL_FACES: [Face; 6] = [
    Face::PosX,
    Face::NegX,
    Face::PosY,
    Face::NegY,
    Face::PosZ,
    Face::NegZ,
];

impl Face {
    pub fn label(self) -> &'static str {
        match self {
            Face::PosX => "+X",
            Face::NegX => "-X",
            Face::PosY => "+Y",
            Face::NegY => "-Y",
            Face::PosZ => "+Z",
            Face::NegZ => "-Z",
        }
    }

    pub fn opposite(self) -> Face {
        match self {
            Face::PosX => Face::NegX,
            Face::NegX => Face::PosX,
            Face::PosY => Face::NegY,
            Face::NegY => Face::PosY,
            Face::PosZ => Face::NegZ,
            Face::NegZ => Face::PosZ,
        }
    }

    /// Outward normal in lattice units.
    pub fn normal(self) -> [i32; 3] {
        match self {
            Face::PosX => [1, 0, 0],
            Face::NegX => [-1, 0, 0],
            Face::PosY => [0, 1, 0],
            Face::NegY => [0, -1, 0],
            Face::PosZ => [0, 0, 1],
            Face::NegZ => [0, 0, -1],
        }
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl Serialize for Face {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModuleSite {
    pub id: String,
    pub position: [i32; 3],
}

/// One mating: `(a_module, a_face)` meets `(b_module, b_face)` across an
/// internal lattice boundary. Module fields index into the topology's
/// module list.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Mating {
    pub a_module: usize,
    pub a_face: Face,
    pub b_module: usize,
    pub b_face: Face,
}

#[derive(Debug, Clone, Serialize)]
pub struct AssemblyTopology {
    modules: Vec<ModuleSite>,
    matings: Vec<Mating>,
}

impl AssemblyTopology {
    /// Validates geometric adjacency (partner sits one unit along the face
    /// normal, faces point at each other) and that no face mates twice.
    pub fn new(modules: Vec<ModuleSite>, matings: Vec<Mating>) -> Result<Self> {
        let mut ids = BTreeSet::new();
        for m in &modules {
            if !ids.insert(m.id.clone()) {
                return Err(Error::InvalidInput(format!("duplicate module id {}", m.id)));
            }
        }
        let mut used_faces = BTreeSet::new();
        for (k, mating) in matings.iter().enumerate() {
            let a = modules.get(mating.a_module).ok_or_else(|| {
                Error::InvalidInput(format!("mating {k}: module index out of range"))
            })?;
            let b = modules.get(mating.b_module).ok_or_else(|| {
                Error::InvalidInput(format!("mating {k}: module index out of range"))
            })?;
            if mating.b_face != mating.a_face.opposite() {
                return Err(Error::InvalidInput(format!(
                    "mating {k}: faces {} and {} do not oppose",
                    mating.a_face, mating.b_face
                )));
            }
            let n = mating.a_face.normal();
            for axis in 0..3 {
                if b.position[axis] - a.position[axis] != n[axis] {
                    return Err(Error::InvalidInput(format!(
                        "mating {k}: {} and {} are not adjacent across {}",
                        a.id, b.id, mating.a_face
                    )));
                }
            }
            for key in [(mating.a_module, mating.a_face), (mating.b_module, mating.b_face)] {
                if !used_faces.insert(key) {
                    return Err(Error::InvalidInput(format!(
                        "mating {k}: face {} of module {} mates twice",
                        key.1, modules[key.0].id
                    )));
                }
            }
        }
        Ok(Self { modules, matings })
    }

    pub fn modules(&self) -> &[ModuleSite] {
        &self.modules
    }

    pub fn matings(&self) -> &[Mating] {
        &self.matings
    }

    pub fn module_degree(&self, module: usize) -> usize {
        self.matings
            .iter()
            .filter(|m| m.a_module == module || m.b_module == module)
            .count()
    }
}

/// The 2x2x2 meta-cube: 8 modules on the corners of a unit lattice cell,
/// each mating its 3 inward faces, 12 matings total (4 per axis). Matings
/// are ordered X-axis pairs first, then Y, then Z, each sorted by the lower
/// module's position.
pub fn metacube_topology() -> AssemblyTopology {
    let mut modules = Vec::new();
    for x in 0..2 {
        for y in 0..2 {
            for z in 0..2 {
                modules.push(ModuleSite {
                    id: format!("m{x}{y}{z}"),
                    position: [x, y, z],
                });
            }
        }
    }
    let index = |p: [i32; 3]| -> usize {
        modules
            .iter()
            .position(|m| m.position == p)
            .expect("corner exists")
    };
    let mut matings = Vec::new();
    for (axis, (pos_face, neg_face)) in [
        (0, (Face::PosX, Face::NegX)),
        (1, (Face::PosY, Face::NegY)),
        (2, (Face::PosZ, Face::NegZ)),
    ] {
        for u in 0..2 {
            for v in 0..2 {
                let mut lo = [0i32; 3];
                lo[(axis + 1) % 3] = u;
                lo[(axis + 2) % 3] = v;
                let mut hi = lo;
                hi[axis] = 1;
                matings.push(Mating {
                    a_module: index(lo),
                    a_face: pos_face,
                    b_module: index(hi),
                    b_face: neg_face,
                });
            }
        }
    }
    AssemblyTopology::new(modules, matings).expect("meta-cube topology is valid")
}

/// Which side of a mating a programmed face carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Member,
    Mate,
}

/// Provenance of one programmed face.
#[derive(Debug, Clone, Serialize)]
pub struct FaceProvenance {
    /// Index of the clique member assigned to this face's mating.
    pub member_index: usize,
    pub mating_index: usize,
    pub role: Role,
}

/// Per-face encodings for a topology. Mating faces carry a clique member
/// and its mate; every other face is blank (all zero).
///
/// Face frame convention: looking at a face from outside along its inward
/// normal, matrix columns advance along the face's +u axis and rows along
/// +v, with (u, v, outward normal) right-handed per label: +X:(+Y,+Z),
/// -X:(+Z,+Y), +Y:(+Z,+X), -Y:(+X,+Z), +Z:(+X,+Y), -Z:(+Y,+X). Mates are
/// placed in the identity alignment about the face normal; the codes' own
/// rotation agnosticism is what tolerates misaligned approaches.
#[derive(Debug, Clone)]
pub struct FaceAssignment {
    topology: AssemblyTopology,
    members: Vec<PixelMatrix>,
    order: usize,
}

impl FaceAssignment {
    pub fn topology(&self) -> &AssemblyTopology {
        &self.topology
    }

    /// The clique members consumed, in mating order.
    pub fn members(&self) -> &[PixelMatrix] {
        &self.members
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// The encoding programmed on `(module, face)`: blank for non-mating
    /// faces, otherwise the assigned member or its mate with provenance.
    pub fn face_code(&self, module: usize, face: Face) -> (PixelMatrix, Option<FaceProvenance>) {
        for (k, mating) in self.topology.matings.iter().enumerate() {
            let member_side = self.member_side(mating);
            for (m, f, role) in [
                (mating.a_module, mating.a_face, 0),
                (mating.b_module, mating.b_face, 1),
            ] {
                if (m, f) == (module, face) {
                    let is_member = (role == 0) == member_side_is_a(member_side);
                    let matrix = if is_member {
                        self.members[k].clone()
                    } else {
                        self.members[k].mate()
                    };
                    return (
                        matrix,
                        Some(FaceProvenance {
                            member_index: k,
                            mating_index: k,
                            role: if is_member { Role::Member } else { Role::Mate },
                        }),
                    );
                }
            }
        }
        (PixelMatrix::blank(self.order), None)
    }

    /// Every programmed face as (module, face, provenance).
    pub fn programmed_faces(&self) -> Vec<(usize, Face, FaceProvenance)> {
        let mut out = Vec::new();
        for module in 0..self.topology.modules.len() {
            for face in ALL_FACES {
                if let (_, Some(p)) = self.face_code(module, face) {
                    out.push((module, face, p));
                }
            }
        }
        out
    }

    fn member_side(&self, mating: &Mating) -> Side {
        let a_key = (
            self.topology.modules[mating.a_module].id.as_str(),
            mating.a_face.label(),
        );
        let b_key = (
            self.topology.modules[mating.b_module].id.as_str(),
            mating.b_face.label(),
        );
        if a_key < b_key {
            Side::A
        } else {
            Side::B
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    A,
    B,
}

fn member_side_is_a(side: Side) -> bool {
    side == Side::A
}

/// Assigns clique members to matings in topology order. The member lands on
/// the lexicographically smaller `(module id, face label)` key of each
/// mating and its mate on the partner face.
pub fn assign_encodings(
    topology: &AssemblyTopology,
    clique: &[PixelMatrix],
) -> Result<FaceAssignment> {
    if clique.len() < topology.matings.len() {
        return Err(Error::Capacity {
            what: "clique members for matings",
            limit: topology.matings.len(),
            requested: clique.len(),
        });
    }
    let order = match clique.first() {
        Some(m) => m.order(),
        None => {
            return Err(Error::InvalidInput(
                "cannot assign from an empty clique".into(),
            ))
        }
    };
    for m in clique {
        if m.order() != order {
            return Err(Error::DimensionMismatch {
                expected: order,
                got: m.order(),
            });
        }
    }
    let mut seen = BTreeSet::new();
    for m in clique {
        if !seen.insert(m.cells().to_vec()) {
            return Err(Error::InvalidInput(
                "clique members must be pairwise distinct".into(),
            ));
        }
    }
    Ok(FaceAssignment {
        topology: topology.clone(),
        members: clique[..topology.matings.len()].to_vec(),
        order,
    })
}

/// Agitation-force window for an assignment: forces strictly inside
/// `(lo, hi)` break misassemblies while correct mates survive.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FluidWindow {
    /// Exclusive lower bound, the full mating attraction.
    pub lo: f64,
    /// min over the assignment of member local scores and pairwise scores.
    pub hi: f64,
    pub empty: bool,
}

/// Window upper bound: the combined agnosticism of the consumed members —
/// the worst member local score and the worst pairwise interaction.
pub fn fluid_window(assignment: &FaceAssignment) -> Result<FluidWindow> {
    let members = assignment.members();
    let mut hi = f64::INFINITY;
    for m in members {
        hi = hi.min(local_score(m)?);
    }
    for (i, a) in members.iter().enumerate() {
        for b in &members[i + 1..] {
            hi = hi.min(pair_score(a, b)?);
        }
    }
    Ok(FluidWindow {
        lo: -1.0,
        hi,
        empty: hi <= -1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{elementwise_product, normalized_score, sylvester};

    #[test]
    fn metacube_counts() {
        let t = metacube_topology();
        assert_eq!(t.modules().len(), 8);
        assert_eq!(t.matings().len(), 12);
        for m in 0..8 {
            assert_eq!(t.module_degree(m), 3);
        }
    }

    #[test]
    fn topology_rejects_bad_matings() {
        let modules = vec![
            ModuleSite {
                id: "a".into(),
                position: [0, 0, 0],
            },
            ModuleSite {
                id: "b".into(),
                position: [2, 0, 0],
            },
        ];
        // not adjacent
        let err = AssemblyTopology::new(
            modules.clone(),
            vec![Mating {
                a_module: 0,
                a_face: Face::PosX,
                b_module: 1,
                b_face: Face::NegX,
            }],
        );
        assert!(err.is_err());
        // faces must oppose
        let mut close = modules;
        close[1].position = [1, 0, 0];
        let err = AssemblyTopology::new(
            close,
            vec![Mating {
                a_module: 0,
                a_face: Face::PosX,
                b_module: 1,
                b_face: Face::PosY,
            }],
        );
        assert!(err.is_err());
    }

    fn pair_topology() -> AssemblyTopology {
        AssemblyTopology::new(
            vec![
                ModuleSite {
                    id: "a".into(),
                    position: [0, 0, 0],
                },
                ModuleSite {
                    id: "b".into(),
                    position: [1, 0, 0],
                },
            ],
            vec![Mating {
                a_module: 0,
                a_face: Face::PosX,
                b_module: 1,
                b_face: Face::NegX,
            }],
        )
        .unwrap()
    }

    #[test]
    fn assignment_places_exact_mates() {
        let t = pair_topology();
        let h = sylvester(2).unwrap();
        let asg = assign_encodings(&t, &[h.clone()]).unwrap();
        let (fa, pa) = asg.face_code(0, Face::PosX);
        let (fb, pb) = asg.face_code(1, Face::NegX);
        assert_eq!(pa.unwrap().role, Role::Member);
        assert_eq!(pb.unwrap().role, Role::Mate);
        assert_eq!(fa, h);
        assert_eq!(fb, h.mate());
        // mating faces multiply to all -1
        let prod = elementwise_product(&fa, &fb).unwrap();
        assert!(prod.cells().iter().all(|&c| c == -1));
        assert_eq!(normalized_score(&fa, &fb).unwrap(), -1.0);
        // non-mating faces are blank
        let (blank, p) = asg.face_code(0, Face::NegX);
        assert!(p.is_none());
        assert_eq!(blank.count_nonzero(), 0);
    }

    #[test]
    fn assignment_is_deterministic_and_counts_faces() {
        let t = metacube_topology();
        let pool: Vec<PixelMatrix> = crate::matrix::sylvester_permutation_pool(3)
            .unwrap()
            .into_iter()
            .take(12)
            .collect();
        let a1 = assign_encodings(&t, &pool).unwrap();
        let a2 = assign_encodings(&t, &pool).unwrap();
        let faces1 = a1.programmed_faces();
        assert_eq!(faces1.len(), 24); // 24 programmed of 48 total
        for (m, f, p) in &faces1 {
            let (code1, _) = a1.face_code(*m, *f);
            let (code2, p2) = a2.face_code(*m, *f);
            assert_eq!(code1, code2);
            assert_eq!(p.role, p2.unwrap().role);
        }
        // no member appears on two matings
        let mut used = std::collections::BTreeSet::new();
        for (_, _, p) in &faces1 {
            if p.role == Role::Member {
                assert!(used.insert(p.member_index));
            }
        }
        assert_eq!(used.len(), 12);
    }

    #[test]
    fn assignment_rejects_short_or_duplicate_cliques() {
        let t = metacube_topology();
        let h = sylvester(2).unwrap();
        assert!(matches!(
            assign_encodings(&t, &[h.clone()]),
            Err(Error::Capacity { .. })
        ));
        let dup = vec![h.clone(); 12];
        assert!(assign_encodings(&t, &dup).is_err());
    }

    #[test]
    fn window_of_single_mating_is_member_local_score() {
        let t = pair_topology();
        let h = sylvester(1).unwrap();
        let asg = assign_encodings(&t, &[h.clone()]).unwrap();
        let w = fluid_window(&asg).unwrap();
        assert_eq!(w.lo, -1.0);
        assert_eq!(w.hi, local_score(&h).unwrap());
        assert!(!w.empty);
    }
}
