use std::ops::{Add, Mul};

/// An associative, commutative binary operation.
///
/// Reductions and scans rely on both properties without checking them.
pub trait BinaryOp<T>: Clone + Send + Sync + 'static {
    fn apply(&self, a: T, b: T) -> T;

    fn identity(&self) -> Option<T> {
        None
    }
}

impl<T, F> BinaryOp<T> for F
where
    F: Fn(T, T) -> T + Clone + Send + Sync + 'static,
{
    fn apply(&self, a: T, b: T) -> T {
        self(a, b)
    }
}

#[derive(Copy, Clone, Debug, Default)]
pub struct Plus;

impl<T: Add<Output = T> + Default> BinaryOp<T> for Plus {
    fn apply(&self, a: T, b: T) -> T {
        a + b
    }

    fn identity(&self) -> Option<T> {
        Some(T::default())
    }
}

#[derive(Copy, Clone, Debug, Default)]
pub struct Multiplies;

impl<T: Mul<Output = T> + From<u8>> BinaryOp<T> for Multiplies {
    fn apply(&self, a: T, b: T) -> T {
        a * b
    }

    fn identity(&self) -> Option<T> {
        Some(T::from(1))
    }
}

#[derive(Copy, Clone, Debug, Default)]
pub struct Min;

impl<T: PartialOrd> BinaryOp<T> for Min {
    fn apply(&self, a: T, b: T) -> T {
        if b < a {
            b
        } else {
            a
        }
    }
}

#[derive(Copy, Clone, Debug, Default)]
pub struct Max;

impl<T: PartialOrd> BinaryOp<T> for Max {
    fn apply(&self, a: T, b: T) -> T {
        if b > a {
            b
        } else {
            a
        }
    }
}
