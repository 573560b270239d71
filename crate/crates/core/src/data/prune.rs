use super::RatingsDataset;
use crate::cf::RatingSample;
use crate::error::{Error, Result};

/// Repeatedly drops users and items with fewer than `min_count` ratings until
/// every remaining row and column has at least `min_count`, then reindexes
/// the survivors densely (keeping their relative order).
pub fn prune_min_degree(ds: &RatingsDataset, min_count: usize) -> Result<RatingsDataset> {
    if min_count == 0 {
        return Err(Error::InvalidArgument("min_count must be >= 1".into()));
    }
    let mut alive: Vec<bool> = vec![true; ds.len()];
    loop {
        let mut user_deg = vec![0usize; ds.users()];
        let mut item_deg = vec![0usize; ds.items()];
        for (s, _) in ds.samples().iter().zip(&alive).filter(|(_, &a)| a) {
            user_deg[s.user] += 1;
            item_deg[s.item] += 1;
        }
        let mut changed = false;
        for (s, a) in ds.samples().iter().zip(alive.iter_mut()) {
            if *a && (user_deg[s.user] < min_count || item_deg[s.item] < min_count) {
                *a = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let kept: Vec<&RatingSample> = ds
        .samples()
        .iter()
        .zip(&alive)
        .filter_map(|(s, &a)| a.then_some(s))
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "no ratings left after pruning with min_count={min_count}"
        )));
    }
    let mut user_seen = vec![false; ds.users()];
    let mut item_seen = vec![false; ds.items()];
    for s in &kept {
        user_seen[s.user] = true;
        item_seen[s.item] = true;
    }
    let (user_new, user_ids) = remap(&user_seen, ds.user_ids());
    let (item_new, item_ids) = remap(&item_seen, ds.item_ids());
    let samples = kept
        .iter()
        .map(|s| {
            RatingSample::new(
                user_new[s.user].expect("kept user"),
                item_new[s.item].expect("kept item"),
                s.rating,
            )
        })
        .collect();
    Ok(RatingsDataset::from_parts(
        user_ids,
        item_ids,
        samples,
        ds.rating_range(),
        ds.duplicates(),
    ))
}

fn remap(present: &[bool], ids: &[String]) -> (Vec<Option<usize>>, Vec<String>) {
    let mut new_ids = Vec::new();
    let map = present
        .iter()
        .zip(ids)
        .map(|(&p, id)| {
            p.then(|| {
                new_ids.push(id.clone());
                new_ids.len() - 1
            })
        })
        .collect();
    (map, new_ids)
}
