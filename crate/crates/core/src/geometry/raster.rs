use super::pose::{Point2, Triangle2};

/// Binary foreground/background partition of an image. Row-major, origin at
/// the top-left pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SilhouetteMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl SilhouetteMask {
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    /// Returns `None` when `bits.len() != width * height`.
    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Option<Self> {
        (bits.len() == width * height).then_some(Self {
            width,
            height,
            bits,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn foreground_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// Twice the signed area of `(a, b, p)`; positive when `p` is left of `a->b`
/// in a y-up frame.
#[inline]
fn edge(a: Point2, b: Point2, p: Point2) -> f64 {
    (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
}

/// Marks every pixel whose center `(i + 0.5, j + 0.5)` lies inside or on the
/// boundary of at least one triangle. Zero-area and non-finite triangles
/// contribute nothing.
pub fn rasterize_silhouette(tris: &[Triangle2], width: usize, height: usize) -> SilhouetteMask {
    let mut mask = SilhouetteMask::empty(width, height);
    for tri in tris {
        fill_triangle(&mut mask, tri);
    }
    mask
}

fn fill_triangle(mask: &mut SilhouetteMask, tri: &Triangle2) {
    if tri.iter().flatten().any(|c| !c.is_finite()) {
        return;
    }
    let [a, mut b, mut c] = *tri;
    let area = edge(a, b, c);
    if area == 0.0 {
        return;
    }
    if area < 0.0 {
        std::mem::swap(&mut b, &mut c);
    }

    let (w, h) = (mask.width as i64, mask.height as i64);
    let min_x = a[0].min(b[0]).min(c[0]);
    let max_x = a[0].max(b[0]).max(c[0]);
    let min_y = a[1].min(b[1]).min(c[1]);
    let max_y = a[1].max(b[1]).max(c[1]);
    // Pixel ranges padded by one; the edge tests decide membership.
    let x0 = ((min_x - 0.5).floor() as i64 - 1).max(0);
    let x1 = ((max_x - 0.5).ceil() as i64 + 1).min(w - 1);
    let y0 = ((min_y - 0.5).floor() as i64 - 1).max(0);
    let y1 = ((max_y - 0.5).ceil() as i64 + 1).min(h - 1);
    if x0 > x1 || y0 > y1 {
        return;
    }

    let width = mask.width;
    for j in y0..=y1 {
        let py = j as f64 + 0.5;
        let row = j as usize * width;
        for i in x0..=x1 {
            let p = [i as f64 + 0.5, py];
            if edge(a, b, p) >= 0.0 && edge(b, c, p) >= 0.0 && edge(c, a, p) >= 0.0 {
                mask.bits[row + i as usize] = true;
            }
        }
    }
}
