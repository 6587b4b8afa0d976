use serde::{Deserialize, Serialize};

/// 2-D image coordinate, serialized as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn midpoint(self, other: Point) -> Point {
        Point::new((self.x + other.x) / 2.0, (self.y + other.y) / 2.0)
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EyeLandmarks {
    pub outer: Point,
    pub inner: Point,
    pub top: Point,
    pub bottom: Point,
}

impl EyeLandmarks {
    pub fn center(&self) -> Point {
        let pts = [self.outer, self.inner, self.top, self.bottom];
        Point::new(
            pts.iter().map(|p| p.x).sum::<f64>() / 4.0,
            pts.iter().map(|p| p.y).sum::<f64>() / 4.0,
        )
    }

    /// Vertical over horizontal extent; 0 for a degenerate eye.
    pub fn aspect_ratio(&self) -> f64 {
        let horizontal = self.outer.distance(self.inner);
        if horizontal <= f64::EPSILON {
            return 0.0;
        }
        self.top.distance(self.bottom) / horizontal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MouthLandmarks {
    pub left: Point,
    pub right: Point,
    pub top: Point,
    pub bottom: Point,
}

impl MouthLandmarks {
    pub fn aspect_ratio(&self) -> f64 {
        let horizontal = self.left.distance(self.right);
        if horizontal <= f64::EPSILON {
            return 0.0;
        }
        self.top.distance(self.bottom) / horizontal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Landmarks {
    pub left_eye: EyeLandmarks,
    pub right_eye: EyeLandmarks,
    pub mouth: MouthLandmarks,
    pub nose_tip: Point,
}

impl Landmarks {
    pub(crate) fn named_points(&self) -> [(&'static str, Point); 13] {
        [
            ("left_eye.outer", self.left_eye.outer),
            ("left_eye.inner", self.left_eye.inner),
            ("left_eye.top", self.left_eye.top),
            ("left_eye.bottom", self.left_eye.bottom),
            ("right_eye.outer", self.right_eye.outer),
            ("right_eye.inner", self.right_eye.inner),
            ("right_eye.top", self.right_eye.top),
            ("right_eye.bottom", self.right_eye.bottom),
            ("mouth.left", self.mouth.left),
            ("mouth.right", self.mouth.right),
            ("mouth.top", self.mouth.top),
            ("mouth.bottom", self.mouth.bottom),
            ("nose_tip", self.nose_tip),
        ]
    }
}
