//! Tiny canned instances whose optima are known by hand.
//!
//! These show up throughout the unit, property, and acceptance tests, and
//! are handy as quick-start inputs for the CLI and Python bindings.

use crate::model::{Element, GroupBound, Instance};
use crate::submodular::Objective;

/// Four elements, two color groups, budget 4, coverage objective over a
/// three-item universe with unit values:
///
/// | element | weight | color | covers |
/// |---------|--------|-------|--------|
/// | 0       | 1      | 1     | {0}    |
/// | 1       | 2      | 1     | {0,1}  |
/// | 2       | 3      | 1     | {1,2}  |
/// | 3       | 1      | 2     | {2}    |
///
/// Group intervals: color 1 `(0, 2]`, color 2 `(0, 1]`. The optimum is
/// `f({1, 3}) = 3` (elements 1 and 3 cover the whole universe).
pub fn chain4() -> Instance {
    Instance {
        elements: vec![
            Element {
                id: 0,
                weight: 1.0,
                color: 1,
            },
            Element {
                id: 1,
                weight: 2.0,
                color: 1,
            },
            Element {
                id: 2,
                weight: 3.0,
                color: 1,
            },
            Element {
                id: 3,
                weight: 1.0,
                color: 2,
            },
        ],
        bounds: vec![
            GroupBound {
                color: 1,
                lower: Some(0),
                upper: 2,
            },
            GroupBound {
                color: 2,
                lower: Some(0),
                upper: 1,
            },
        ],
        budget: 4.0,
        objective: Objective::Coverage {
            item_values: vec![1.0, 1.0, 1.0],
            cover_sets: vec![vec![0], vec![0, 1], vec![1, 2], vec![2]],
        },
    }
}

/// Two elements with weights 1 and 2 in one unbounded-below group; the
/// smallest instance on which weighted pipage rounding does anything
/// interesting (start it at `x = (0.5, 0.5)`).
pub fn two_element() -> Instance {
    Instance {
        elements: vec![
            Element {
                id: 0,
                weight: 1.0,
                color: 1,
            },
            Element {
                id: 1,
                weight: 2.0,
                color: 1,
            },
        ],
        bounds: vec![GroupBound {
            color: 1,
            lower: None,
            upper: 2,
        }],
        budget: 3.0,
        objective: Objective::Modular {
            values: vec![1.0, 1.0],
        },
    }
}

/// Three elements of weights 1, 2, 3 in a single group with interval
/// `(0, 2]` and budget 4; element 2 is heavy but valuable.
pub fn single_group3() -> Instance {
    Instance {
        elements: vec![
            Element {
                id: 0,
                weight: 1.0,
                color: 1,
            },
            Element {
                id: 1,
                weight: 2.0,
                color: 1,
            },
            Element {
                id: 2,
                weight: 3.0,
                color: 1,
            },
        ],
        bounds: vec![GroupBound {
            color: 1,
            lower: Some(0),
            upper: 2,
        }],
        budget: 4.0,
        objective: Objective::Modular {
            values: vec![1.0, 1.0, 5.0],
        },
    }
}
