//! SMILES output. Writing the same graph from different root atoms gives
//! different spellings of one molecule, which is how fingerprint invariance
//! is exercised.

use std::collections::BTreeMap;

use super::smiles::{BondOrder, MolecularGraph};

const ORGANIC: &[&str] = &["B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"];
const AROMATIC_ORGANIC: &[&str] = &["B", "C", "N", "O", "P", "S"];

fn atom_text(graph: &MolecularGraph, i: usize) -> String {
    let a = &graph.atoms[i];
    let symbol = if a.aromatic {
        a.element.to_lowercase()
    } else {
        a.element.clone()
    };
    let bare_ok = if a.aromatic {
        AROMATIC_ORGANIC.contains(&a.element.as_str())
    } else {
        ORGANIC.contains(&a.element.as_str()) || a.element == "*"
    };
    if bare_ok && a.hydrogens == 0 && a.charge == 0 {
        return symbol;
    }
    let mut s = format!("[{symbol}");
    match a.hydrogens {
        0 => {}
        1 => s.push('H'),
        n => s.push_str(&format!("H{n}")),
    }
    match a.charge {
        0 => {}
        1 => s.push('+'),
        -1 => s.push('-'),
        c if c > 0 => s.push_str(&format!("+{c}")),
        c => s.push_str(&format!("-{}", -c)),
    }
    s.push(']');
    s
}

fn bond_text(graph: &MolecularGraph, a: usize, b: usize, order: BondOrder) -> &'static str {
    let both = graph.atoms[a].aromatic && graph.atoms[b].aromatic;
    match order {
        BondOrder::Single if both => "-",
        BondOrder::Single => "",
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
        BondOrder::Quadruple => "$",
        BondOrder::Aromatic if both => "",
        BondOrder::Aromatic => ":",
    }
}

fn ring_label(n: u32) -> String {
    if n < 10 {
        n.to_string()
    } else {
        format!("%{n:02}")
    }
}

/// Writes `graph` starting from atom `root`; other disconnected components
/// follow after `.` in order of their lowest atom index. Neighbours are
/// visited in index order.
pub fn write_smiles(graph: &MolecularGraph, root: usize) -> String {
    let n = graph.atoms.len();
    let adj = graph.adjacency();
    let mut order = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut counter = 0;
    let mut roots = Vec::new();

    // Pass 1: depth-first tree; every non-tree edge becomes a ring closure.
    for start in std::iter::once(root).chain(0..n) {
        if start >= n || order[start] != usize::MAX {
            continue;
        }
        roots.push(start);
        let mut stack = vec![start];
        while let Some(&u) = stack.last() {
            if order[u] == usize::MAX {
                order[u] = counter;
                counter += 1;
            }
            let mut nbrs: Vec<usize> = adj[u].iter().map(|&(v, _)| v).collect();
            nbrs.sort_unstable();
            match nbrs.into_iter().find(|&v| order[v] == usize::MAX) {
                Some(v) => {
                    parent[v] = u;
                    children[u].push(v);
                    stack.push(v);
                }
                None => {
                    stack.pop();
                }
            }
        }
    }

    let is_tree = |u: usize, v: usize| parent[v] == u || parent[u] == v;
    let mut out = String::new();
    let mut open: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    let mut free: Vec<bool> = vec![true; 100];

    // Pass 2: emit. Iterative to keep deep chains off the call stack.
    enum Step {
        Atom(usize),
        Text(&'static str),
    }
    for (ci, &r) in roots.iter().enumerate() {
        if ci > 0 {
            out.push('.');
        }
        let mut work = vec![Step::Atom(r)];
        while let Some(step) = work.pop() {
            let u = match step {
                Step::Text(t) => {
                    out.push_str(t);
                    continue;
                }
                Step::Atom(u) => u,
            };
            if parent[u] != usize::MAX {
                let p = parent[u];
                let o = adj[u].iter().find(|&&(v, _)| v == p).expect("tree edge").1;
                out.push_str(bond_text(graph, p, u, o));
            }
            out.push_str(&atom_text(graph, u));
            let mut ring: Vec<(usize, BondOrder)> = adj[u]
                .iter()
                .copied()
                .filter(|&(v, _)| !is_tree(u, v))
                .collect();
            ring.sort_by_key(|&(v, _)| order[v]);
            for (v, o) in ring {
                let key = (u.min(v), u.max(v));
                if order[v] < order[u] {
                    let label = open.remove(&key).expect("opened earlier");
                    out.push_str(bond_text(graph, u, v, o));
                    out.push_str(&ring_label(label));
                    free[label as usize] = true;
                } else {
                    let label = (1..100).find(|&l| free[l]).expect("fewer than 100 open rings") as u32;
                    free[label as usize] = false;
                    open.insert(key, label);
                    out.push_str(&ring_label(label));
                }
            }
            let kids = &children[u];
            // Pushed in reverse: all but the last child go in parentheses.
            for (k, &c) in kids.iter().enumerate().rev() {
                if k + 1 == kids.len() {
                    work.push(Step::Atom(c));
                } else {
                    work.push(Step::Text(")"));
                    work.push(Step::Atom(c));
                    work.push(Step::Text("("));
                }
            }
        }
    }
    out
}
