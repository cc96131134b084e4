use super::sparse::SparseGraph;
use crate::error::{Error, Result};
use crate::geometry::PointCloud;

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Component id per node. Ids are numbered by the lowest node of each component.
pub fn connected_components(graph: &SparseGraph) -> Vec<usize> {
    let n = graph.n();
    let mut parent: Vec<usize> = (0..n).collect();
    for (i, j, _) in graph.edges() {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a != b {
            // keep the smaller root so numbering is deterministic
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            parent[hi] = lo;
        }
    }
    let mut id = vec![usize::MAX; n];
    let mut next = 0;
    let mut out = vec![0; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if id[root] == usize::MAX {
            id[root] = next;
            next += 1;
        }
        out[i] = id[root];
    }
    out
}

pub fn component_count(components: &[usize]) -> usize {
    components.iter().max().map_or(0, |m| m + 1)
}

/// Fails with the list of components that contain no labeled node.
pub fn check_labeled_components(graph: &SparseGraph, cloud: &PointCloud) -> Result<()> {
    let comp = connected_components(graph);
    let count = component_count(&comp);
    let mut has_label = vec![false; count];
    for &i in &cloud.labels().nodes {
        has_label[comp[i]] = true;
    }
    let mut sizes = vec![0usize; count];
    for &c in &comp {
        sizes[c] += 1;
    }
    let missing: Vec<usize> = (0..count).filter(|&c| !has_label[c]).collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::UnlabeledComponents {
            sizes: missing.iter().map(|&c| sizes[c]).collect(),
            components: missing,
        })
    }
}

/// Nodes of the component holding every label, in ascending order.
///
/// Fails if labels are spread over more than one component.
pub fn labeled_component(graph: &SparseGraph, cloud: &PointCloud) -> Result<Vec<usize>> {
    let comp = connected_components(graph);
    let labels = &cloud.labels().nodes;
    let first = *labels.first().ok_or(Error::NoLabels)?;
    let target = comp[first];
    if let Some(&other) = labels.iter().find(|&&z| comp[z] != target) {
        return Err(Error::data(format!(
            "labels {first} and {other} lie in different connected components"
        )));
    }
    Ok((0..graph.n()).filter(|&i| comp[i] == target).collect())
}

/// Restricts graph and cloud to the component that holds all labels.
pub fn restrict_to_labeled_component(
    graph: &SparseGraph,
    cloud: &PointCloud,
) -> Result<(SparseGraph, PointCloud, Vec<usize>)> {
    let keep = labeled_component(graph, cloud)?;
    Ok((graph.subgraph(&keep)?, cloud.subset(&keep)?, keep))
}
