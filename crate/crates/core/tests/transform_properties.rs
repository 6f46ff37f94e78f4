//! Property tests for the transform algebra and codec contracts.

use augeval_core::imageops::{apply, decode, encode_png, InputFormat, Raster, Transform};
use proptest::prelude::*;

fn raster_strategy(max_dim: u32) -> impl Strategy<Value = Raster> {
    (1..=max_dim, 1..=max_dim).prop_flat_map(|(w, h)| {
        proptest::collection::vec(any::<u8>(), (w * h * 3) as usize)
            .prop_map(move |pixels| Raster::new(w, h, pixels).unwrap())
    })
}

/// Sorted channel plane for multiset comparisons.
fn plane(raster: &Raster, channel: usize) -> Vec<u8> {
    let mut values: Vec<u8> = raster
        .pixels()
        .chunks_exact(3)
        .map(|px| px[channel])
        .collect();
    values.sort_unstable();
    values
}

proptest! {
    #[test]
    fn involutions_are_bit_exact(z in raster_strategy(32)) {
        for t in [
            Transform::BgrSwap,
            Transform::FlipH,
            Transform::FlipV,
            Transform::rotate(180.0).unwrap(),
        ] {
            prop_assert_eq!(&apply(&apply(&z, &t), &t), &z);
        }
    }

    #[test]
    fn four_quarter_turns_are_identity(z in raster_strategy(32)) {
        let rot90 = Transform::rotate(90.0).unwrap();
        let turned = apply(&apply(&apply(&apply(&z, &rot90), &rot90), &rot90), &rot90);
        prop_assert_eq!(turned, z);
    }

    #[test]
    fn half_turn_equals_both_flips(z in raster_strategy(32)) {
        let rot180 = Transform::rotate(180.0).unwrap();
        prop_assert_eq!(
            apply(&z, &rot180),
            apply(&apply(&z, &Transform::FlipV), &Transform::FlipH)
        );
    }

    #[test]
    fn bgr_swaps_rb_planes_and_keeps_green(z in raster_strategy(32)) {
        let swapped = apply(&z, &Transform::BgrSwap);
        prop_assert_eq!(plane(&swapped, 1), plane(&z, 1));
        prop_assert_eq!(plane(&swapped, 0), plane(&z, 2));
        prop_assert_eq!(plane(&swapped, 2), plane(&z, 0));
    }

    #[test]
    fn permutation_transforms_preserve_pixel_multiset(z in raster_strategy(24)) {
        let mut original: Vec<[u8; 3]> = z.pixels().chunks_exact(3)
            .map(|p| [p[0], p[1], p[2]]).collect();
        original.sort_unstable();
        for id in ["fliph", "flipv", "rot90", "rot180", "rot270"] {
            let t = Transform::parse(id).unwrap();
            let out = apply(&z, &t);
            let mut moved: Vec<[u8; 3]> = out.pixels().chunks_exact(3)
                .map(|p| [p[0], p[1], p[2]]).collect();
            moved.sort_unstable();
            prop_assert_eq!(&moved, &original, "{} lost pixels", id);
        }
    }

    #[test]
    fn arbitrary_rotation_has_bounding_box_dims(
        z in raster_strategy(24),
        angle in 1.0f64..360.0,
    ) {
        prop_assume!(angle % 90.0 != 0.0);
        let out = apply(&z, &Transform::rotate(angle).unwrap());
        let theta = angle.to_radians();
        let (w, h) = (f64::from(z.width()), f64::from(z.height()));
        let expect_w = (w * theta.cos().abs() + h * theta.sin().abs()).ceil() as u32;
        let expect_h = (w * theta.sin().abs() + h * theta.cos().abs()).ceil() as u32;
        prop_assert_eq!((out.width(), out.height()), (expect_w.max(1), expect_h.max(1)));
    }

    #[test]
    fn png_round_trip_is_pixel_identical(z in raster_strategy(24)) {
        let bytes = encode_png(&z).unwrap();
        prop_assert_eq!(decode(&bytes, InputFormat::Png).unwrap(), z);
    }
}
