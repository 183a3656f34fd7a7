#![allow(dead_code)]

pub mod geweke;

use cgseq::model::Equation;
use cgseq::{SystemParams, Vector};
use cgseq_testkit::joint::Step;

pub fn params_of(s: &Step) -> SystemParams {
    SystemParams::new(
        Equation::new(s.a0.clone(), s.a1.clone(), s.b1.clone(), s.b2.clone()),
        Equation::new(s.c0.clone(), s.c1.clone(), s.d1.clone(), s.d2.clone()),
    )
    .unwrap()
}

pub fn v1(x: f64) -> Vector {
    Vector::from_element(1, x)
}
