//! Writes the shipped instance files into `<dir>` (default `data`).

use std::path::PathBuf;

use lldforge::exactalg::Field;
use lldforge::format::{write_ldb, write_matspace, write_twisted, TwistedFile};
use lldforge::ldb::{make_char2_tower, make_quadratic_ext, make_quaternion, QuadraticKind};
use lldforge::matspace::MatSpace;
use lldforge::suite::{f9_twisted, scrambled_instance, small_field_counterexample};
use lldforge::twisted::build_twisted;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    std::fs::create_dir_all(&dir)?;
    let put = |name: &str, text: String| std::fs::write(dir.join(name), text);

    let q = Field::Q;
    let m1 = q.from_i64(-1);
    let quat = make_quaternion(&q, &m1, &m1)?;
    put("quat.twisted", write_twisted(&TwistedFile { algebra: quat, normal: None }))?;
    let gauss = make_quadratic_ext(&q, QuadraticKind::Kummer(m1.clone()))?;
    put("gaussian.twisted", write_twisted(&TwistedFile { algebra: gauss.clone(), normal: None }))?;
    let (s, h) = scrambled_instance(&build_twisted(&gauss)?, &q.from_i64(3), 0)?;
    put("gaussian-scrambled.matspace", write_matspace(&s))?;
    put("gaussian-scrambled-h.matspace", write_matspace(&h))?;
    put("tower2.ldb", write_ldb(&make_char2_tower(2)?))?;
    put("smallfield-f2.matspace", write_matspace(&small_field_counterexample(2, 2, 3)?))?;
    put("mata4-f2.matspace", write_matspace(&MatSpace::alternating(&Field::prime(2)?, 4)))?;
    put("f9.matspace", write_matspace(&f9_twisted()?.space))?;
    Ok(())
}
