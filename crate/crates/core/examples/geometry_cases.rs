// One triple of circles for each intersection case and the reference
// coordinate it produces.
//
//     cargo run --example geometry_cases

use ntcwla::geometry::{
    triple_reference, Circle, Point2D, TestArea, TripleClass, TripleRelations, DEFAULT_EPS,
};
use std::error::Error;

fn circle(x: f64, y: f64, r: f64) -> Result<Circle, Box<dyn Error>> {
    Ok(Circle::new(Point2D::new(x, y), r)?)
}

type Case = (TripleClass, Option<Point2D>);

pub fn run_example() -> Result<Vec<Case>, Box<dyn Error>> {
    let area = TestArea::new(Point2D::new(-10.0, -10.0), Point2D::new(10.0, 10.0))?;
    let cases = [
        (
            "common point",
            [
                circle(0.0, 0.0, 1.0)?,
                circle(2.0, 0.0, 1.0)?,
                circle(1.0, 1.0, 1.0)?,
            ],
        ),
        (
            "region",
            [
                circle(0.0, 0.0, 2.2)?,
                circle(3.0, 0.0, 2.2)?,
                circle(1.5, 2.6, 2.2)?,
            ],
        ),
        (
            "line",
            [
                circle(0.0, 0.0, 2.0)?,
                circle(3.0, 0.0, 2.0)?,
                circle(-1.5, 0.0, 1.0)?,
            ],
        ),
        (
            "two only",
            [
                circle(0.0, 0.0, 3.0)?,
                circle(4.0, 0.0, 3.0)?,
                circle(2.0, 5.0, 2.0)?,
            ],
        ),
        (
            "none",
            [
                circle(0.0, 0.0, 1.0)?,
                circle(5.0, 0.0, 1.0)?,
                circle(0.0, 5.0, 1.0)?,
            ],
        ),
    ];
    let mut out = Vec::new();
    for (label, circles) in cases {
        let rel = TripleRelations::compute(&circles, DEFAULT_EPS);
        match triple_reference(&circles, &rel, &area, DEFAULT_EPS) {
            Some(r) => {
                println!("{label:>12}: {:?} -> {} (mr {})", r.class, r.point, r.mr_cm);
                out.push((r.class, Some(r.point)));
            }
            None => {
                println!("{label:>12}: no reference");
                out.push((TripleClass::NoIntersection, None));
            }
        }
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
