//! Line-oriented v1 text formats: `mat`, `matspace`, `quadform`, `ldb` and
//! `twisted`. Scalars are whitespace-free tokens in the syntax of
//! [`parse_scalar`]; blank lines and `#` comments are ignored.

use crate::error::{Error, Result};
use crate::exactalg::parse::parse_scalar;
use crate::exactalg::{vecops, BaseField, Field, Mat, Scalar, Vector};
use crate::ldb::{BilinearPairing, LdbAlgebra};
use crate::matspace::MatSpace;
use crate::quadform::QuadForm;
use crate::twisted::{build_twisted, Hyperplane, TwistedSpace};

fn perr(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, col, msg: msg.into() }
}

struct Token<'a> {
    text: &'a str,
    col: usize,
}

struct Reader<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
    /// Line number reported at end of input.
    last: usize,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Reader<'a> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("")))
            .filter(|(_, l)| !l.trim().is_empty())
            .collect();
        let last = text.lines().count() + 1;
        Reader { lines, pos: 0, last }
    }

    fn line_no(&self) -> usize {
        self.lines.get(self.pos).map_or(self.last, |l| l.0)
    }

    fn next(&mut self, what: &str) -> Result<(usize, Vec<Token<'a>>)> {
        let (no, l) = *self.lines.get(self.pos).ok_or_else(|| perr(self.last, 1, format!("unexpected end of input, expected {what}")))?;
        self.pos += 1;
        let mut toks = Vec::new();
        let mut i = 0;
        let b = l.as_bytes();
        while i < b.len() {
            if b[i].is_ascii_whitespace() {
                i += 1;
                continue;
            }
            let start = i;
            while i < b.len() && !b[i].is_ascii_whitespace() {
                i += 1;
            }
            toks.push(Token { text: &l[start..i], col: start + 1 });
        }
        Ok((no, toks))
    }

    fn peek_keyword(&self) -> Option<&'a str> {
        self.lines.get(self.pos).and_then(|(_, l)| l.split_whitespace().next())
    }

    /// A line `kw args...`, returning the arguments.
    fn keyword(&mut self, kw: &str) -> Result<(usize, Vec<Token<'a>>)> {
        let (no, mut toks) = self.next(kw)?;
        if toks.first().map(|t| t.text) != Some(kw) {
            let col = toks.first().map_or(1, |t| t.col);
            return Err(perr(no, col, format!("expected `{kw}`")));
        }
        toks.remove(0);
        Ok((no, toks))
    }

    fn header(&mut self, kind: &str) -> Result<()> {
        let (no, toks) = self.keyword(kind)?;
        match toks.as_slice() {
            [v] if v.text == "v1" => Ok(()),
            [v, ..] => Err(perr(no, v.col, format!("unsupported {kind} version {}", v.text))),
            [] => Err(perr(no, kind.len() + 1, "missing version")),
        }
    }

    fn usizes(&mut self, kw: &str, count: usize) -> Result<Vec<usize>> {
        let (no, toks) = self.keyword(kw)?;
        if toks.len() != count {
            return Err(perr(no, 1, format!("`{kw}` takes {count} integer(s)")));
        }
        toks.iter().map(|t| t.text.parse::<usize>().map_err(|_| perr(no, t.col, format!("bad integer {}", t.text)))).collect()
    }

    fn field(&mut self) -> Result<Field> {
        let (no, toks) = self.keyword("field")?;
        let col_end = toks.last().map_or(7, |t| t.col + t.text.len());
        let prime = |t: &Token| -> Result<u64> { t.text.parse::<u64>().map_err(|_| perr(no, t.col, format!("bad prime {}", t.text))) };
        let base = |toks: &[Token], at: usize| -> Result<(BaseField, usize)> {
            match toks.get(at).map(|t| t.text) {
                Some("Q") => Ok((BaseField::Q, at + 1)),
                Some("Fp") => {
                    let t = toks.get(at + 1).ok_or_else(|| perr(no, col_end, "missing prime"))?;
                    let p = prime(t)?;
                    Field::prime(p).map_err(|e| perr(no, t.col, e.to_string()))?;
                    Ok((BaseField::Fp(p), at + 2))
                }
                _ => Err(perr(no, toks.get(at).map_or(col_end, |t| t.col), "expected Q or Fp <p>")),
            }
        };
        match toks.first().map(|t| t.text) {
            Some("FF") => {
                let (b, at) = base(&toks, 1)?;
                if toks.get(at).map(|t| t.text) != Some("vars") {
                    return Err(perr(no, toks.get(at).map_or(col_end, |t| t.col), "expected `vars`"));
                }
                let vars: Vec<String> = toks[at + 1..].iter().map(|t| t.text.to_string()).collect();
                if vars.is_empty() {
                    return Err(perr(no, col_end, "function field needs at least one variable"));
                }
                Field::function_field_owned(b, vars).map_err(|e| perr(no, toks[0].col, e.to_string()))
            }
            _ => {
                let (b, at) = base(&toks, 0)?;
                if let Some(t) = toks.get(at) {
                    return Err(perr(no, t.col, "trailing tokens after field"));
                }
                Ok(match b {
                    BaseField::Q => Field::Q,
                    BaseField::Fp(p) => Field::Fp(p),
                })
            }
        }
    }

    fn scalars(&mut self, field: &Field, count: usize, what: &str) -> Result<Vector> {
        let (no, toks) = self.next(what)?;
        if toks.len() != count {
            let col = toks.get(count).map_or(1, |t| t.col);
            return Err(perr(no, col, format!("expected {count} entries, found {}", toks.len())));
        }
        toks.iter()
            .map(|t| {
                parse_scalar(t.text, field).map_err(|e| match e {
                    Error::Parse { col, msg, .. } => perr(no, t.col + col - 1, msg),
                    other => perr(no, t.col, other.to_string()),
                })
            })
            .collect()
    }

    fn matrix(&mut self, field: &Field, m: usize, n: usize) -> Result<Mat> {
        let mut data = Vec::with_capacity(m * n);
        for _ in 0..m {
            data.extend(self.scalars(field, n, "matrix row")?);
        }
        Ok(Mat::from_entries(field, m, n, data))
    }

    fn finish(&self) -> Result<()> {
        if self.pos < self.lines.len() {
            return Err(perr(self.line_no(), 1, "trailing input"));
        }
        Ok(())
    }
}

fn write_rows(out: &mut String, m: &Mat) {
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|s| s.to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
}

pub fn write_mat(m: &Mat) -> String {
    let mut out = format!("mat v1\nfield {}\ndims {} {}\n", m.field(), m.rows(), m.cols());
    write_rows(&mut out, m);
    out
}

pub fn parse_mat(text: &str) -> Result<Mat> {
    let mut r = Reader::new(text);
    r.header("mat")?;
    let f = r.field()?;
    let d = r.usizes("dims", 2)?;
    let m = r.matrix(&f, d[0], d[1])?;
    r.finish()?;
    Ok(m)
}

pub fn write_matspace(s: &MatSpace) -> String {
    let mut out = format!("matspace v1\nfield {}\ndims {} {}\nbasis {}\n", s.field(), s.rows(), s.cols(), s.dim());
    for (k, b) in s.basis().iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        write_rows(&mut out, b);
    }
    out
}

fn read_matspace(r: &mut Reader) -> Result<MatSpace> {
    r.header("matspace")?;
    let f = r.field()?;
    let d = r.usizes("dims", 2)?;
    let basis_line = r.line_no();
    let s = r.usizes("basis", 1)?[0];
    let mats: Vec<Mat> = (0..s).map(|_| r.matrix(&f, d[0], d[1])).collect::<Result<_>>()?;
    match MatSpace::new(&f, d[0], d[1], mats.clone()) {
        Ok(sp) => Ok(sp),
        Err(Error::EmptyBasis) => Ok(MatSpace::zero(&f, d[0], d[1])),
        Err(Error::PreconditionFailed(_)) => Ok(MatSpace::spanned_by(&f, d[0], d[1], &mats)),
        Err(e) => Err(perr(basis_line, 1, e.to_string())),
    }
}

pub fn parse_matspace(text: &str) -> Result<MatSpace> {
    let mut r = Reader::new(text);
    let s = read_matspace(&mut r)?;
    r.finish()?;
    Ok(s)
}

pub fn write_quadform(q: &QuadForm) -> String {
    let mut out = format!("quadform v1\nfield {}\ndim {}\n", q.field(), q.dim());
    let g = q.gram();
    for i in 0..q.dim() {
        let row: Vec<String> = (i..q.dim()).map(|j| g.get(i, j).to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

fn read_quadform(r: &mut Reader) -> Result<QuadForm> {
    r.header("quadform")?;
    let f = r.field()?;
    let n = r.usizes("dim", 1)?[0];
    let mut g = Mat::zeros(&f, n, n);
    for i in 0..n {
        let row = r.scalars(&f, n - i, "upper-triangular row")?;
        for (k, v) in row.into_iter().enumerate() {
            g.set(i, i + k, v);
        }
    }
    QuadForm::new(&g)
}

pub fn parse_quadform(text: &str) -> Result<QuadForm> {
    let mut r = Reader::new(text);
    let q = read_quadform(&mut r)?;
    r.finish()?;
    Ok(q)
}

pub fn write_ldb(a: &LdbAlgebra) -> String {
    let n = a.dim();
    let mut out = format!("ldb v1\nfield {}\ndim {n}\nstar\n", a.field());
    for (k, m) in a.star.mats().iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        write_rows(&mut out, m);
    }
    out.push_str("bullet\n");
    for (k, m) in a.bullet.mats().iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        write_rows(&mut out, m);
    }
    out.push_str(&write_quadform(&a.q));
    out
}

fn read_ldb(r: &mut Reader) -> Result<LdbAlgebra> {
    r.header("ldb")?;
    let f = r.field()?;
    let n = r.usizes("dim", 1)?[0];
    if n == 0 {
        return Err(perr(r.line_no(), 1, "dimension must be positive"));
    }
    r.keyword("star")?;
    let star: Vec<Mat> = (0..n).map(|_| r.matrix(&f, n, n)).collect::<Result<_>>()?;
    r.keyword("bullet")?;
    let bullet: Vec<Mat> = (0..n).map(|_| r.matrix(&f, n, n)).collect::<Result<_>>()?;
    let qline = r.line_no();
    let q = read_quadform(r)?;
    let a = LdbAlgebra::new("ldb", BilinearPairing::new(star)?, BilinearPairing::new(bullet)?, None).map_err(|e| perr(qline, 1, e.to_string()))?;
    if a.q != q {
        return Err(perr(qline, 1, "quadform block differs from the attached form of ⋆ and •"));
    }
    Ok(a)
}

pub fn parse_ldb(text: &str) -> Result<LdbAlgebra> {
    let mut r = Reader::new(text);
    let a = read_ldb(&mut r)?;
    r.finish()?;
    Ok(a)
}

/// A twisted space with an optional hyperplane given by its `q̃`-normal vector.
#[derive(Clone, Debug)]
pub struct TwistedFile {
    pub algebra: LdbAlgebra,
    pub normal: Option<Vector>,
}

impl TwistedFile {
    pub fn twisted(&self) -> Result<TwistedSpace> {
        build_twisted(&self.algebra)
    }

    /// `{v : b̃(normal, v) = 0}`, with `b̃` the polar form of `q̃`.
    pub fn hyperplane(&self, t: &TwistedSpace) -> Option<Hyperplane> {
        let nu = self.normal.as_ref()?;
        let row = Mat::from_rows(t.field(), vec![nu.clone()]).mul(&t.qtilde.polar());
        Some(Hyperplane { basis: row.kernel_basis(), alpha: None, certificate: None })
    }
}

/// Normal vector of `A ⊕ K(α,1)`: `(0, −α, 1)`.
pub fn alpha_normal(t: &TwistedSpace, alpha: &Scalar) -> Vector {
    let f = t.field();
    let mut v = vecops::zero(f, t.d());
    v.push(alpha.neg());
    v.push(f.one());
    v
}

pub fn write_twisted(tf: &TwistedFile) -> String {
    let mut out = String::from("twisted v1\n");
    out.push_str(&write_ldb(&tf.algebra));
    if let Some(nu) = &tf.normal {
        let toks: Vec<String> = nu.iter().map(|s| s.to_string()).collect();
        out.push_str(&format!("hyperplane {}\n", toks.join(" ")));
    }
    out
}

pub fn parse_twisted(text: &str) -> Result<TwistedFile> {
    let mut r = Reader::new(text);
    r.header("twisted")?;
    let algebra = read_ldb(&mut r)?;
    let normal = if r.peek_keyword() == Some("hyperplane") {
        let no = r.line_no();
        let (_, toks) = r.keyword("hyperplane")?;
        let n = algebra.dim() + 2;
        if toks.len() != n {
            return Err(perr(no, 1, format!("hyperplane normal needs {n} coordinates")));
        }
        let v: Vector = toks
            .iter()
            .map(|t| parse_scalar(t.text, algebra.field()).map_err(|e| perr(no, t.col, e.to_string())))
            .collect::<Result<_>>()?;
        if vecops::is_zero(&v) {
            return Err(perr(no, 1, "hyperplane normal is zero"));
        }
        Some(v)
    } else {
        None
    };
    r.finish()?;
    Ok(TwistedFile { algebra, normal })
}

/// A field descriptor as on a `field` line, e.g. `Fp 5` or `FF Q vars a b`.
pub fn parse_field(text: &str) -> Result<Field> {
    let line = format!("field {text}");
    let mut r = Reader::new(&line);
    let f = r.field()?;
    r.finish()?;
    Ok(f)
}

/// Comma- or whitespace-separated scalars.
pub fn parse_vector(text: &str, field: &Field) -> Result<Vector> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| parse_scalar(t, field))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldb::{make_char2_tower, make_quaternion};

    #[test]
    fn mat_roundtrip_f7() {
        let f = Field::prime(7).unwrap();
        let m = Mat::from_fn(&f, 3, 4, |i, j| f.from_i64((i * 5 + j * 3) as i64));
        assert_eq!(parse_mat(&write_mat(&m)).unwrap(), m);
    }

    #[test]
    fn malformed_field_line() {
        match parse_matspace("matspace v1\nfield R\ndims 1 1\nbasis 0\n") {
            Err(Error::Parse { line, col, .. }) => assert_eq!((line, col), (2, 7)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tower_roundtrip() {
        let a = make_char2_tower(2).unwrap();
        let b = parse_ldb(&write_ldb(&a)).unwrap();
        assert_eq!((&b.star, &b.bullet, &b.q), (&a.star, &a.bullet, &a.q));
    }

    #[test]
    fn twisted_with_normal() {
        let f = Field::Q;
        let m1 = f.from_i64(-1);
        let a = make_quaternion(&f, &m1, &m1).unwrap();
        let t = build_twisted(&a).unwrap();
        let tf = TwistedFile { algebra: a, normal: Some(alpha_normal(&t, &m1)) };
        let back = parse_twisted(&write_twisted(&tf)).unwrap();
        assert_eq!(back.normal, tf.normal);
        let h = back.hyperplane(&t).unwrap();
        let e = crate::twisted::nonisotropic_hyperplane(&t, &m1).unwrap();
        let hs = crate::twisted::hyperplane_space(&t, &h).unwrap();
        assert!(hs.same_span(&crate::twisted::hyperplane_space(&t, &e).unwrap()));
    }

    #[test]
    fn bad_scalar_column() {
        let text = "mat v1\nfield Q\ndims 1 2\n1 2/x\n";
        match parse_mat(text) {
            Err(Error::Parse { line, col, .. }) => assert_eq!((line, col), (4, 5)),
            other => panic!("{other:?}"),
        }
    }
}
