//! ChangedDataCapture.

use alloc::collections::BTreeSet;

use crate::graph::Graph;
use crate::term::Term;
use crate::vocab::rdf;

fn typed_subjects(g: &Graph) -> BTreeSet<Term> {
    g.matches(None, Some(&rdf::type_()), None)
        .map(|t| t.subject)
        .collect()
}

/// Compares the new version of a source against the old one. Flag 0
/// returns the descriptions of newly typed resources; flag 1 returns the
/// remaining triples of `new` that `old` lacks.
pub fn changed_data_capture(old: &Graph, new: &Graph, flag: u8) -> Graph {
    let old_subjects = typed_subjects(old);
    let inserted: BTreeSet<Term> = typed_subjects(new)
        .into_iter()
        .filter(|s| !old_subjects.contains(s))
        .collect();
    let ins = new.restrict_subjects(&inserted);
    if flag == 0 {
        return ins;
    }
    new.difference(&ins).difference(old)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::turtle::parse_turtle;

    fn ttl(s: &str) -> Graph {
        parse_turtle(s.as_bytes()).unwrap().graph
    }

    #[test]
    fn inserted_and_updated() {
        let old = ttl("<http://a> a <http://C> ; <http://p> \"1\" .");
        let new = ttl(
            "<http://a> a <http://C> ; <http://p> \"2\" . <http://b> a <http://C> ; <http://p> \"3\" .",
        );
        let ins = changed_data_capture(&old, &new, 0);
        assert_eq!(ins, ttl("<http://b> a <http://C> ; <http://p> \"3\" ."));
        let upd = changed_data_capture(&old, &new, 1);
        assert_eq!(upd, ttl("<http://a> <http://p> \"2\" ."));
        assert!(changed_data_capture(&new, &new, 0).is_empty());
        assert!(changed_data_capture(&new, &new, 1).is_empty());
    }
}
