use std::fmt::Write as _;

use super::SkeletonAnimation;

/// Serializes back to BVH text. Channel values are written with enough
/// precision for a re-parse to agree within 1e-6.
pub fn write_bvh(anim: &SkeletonAnimation) -> String {
    let mut out = String::new();
    out.push_str("HIERARCHY\n");
    write_joint(&mut out, anim, 0, 0);

    out.push_str("MOTION\n");
    let _ = writeln!(out, "Frames: {}", anim.frame_count());
    let _ = writeln!(out, "Frame Time: {:.8}", anim.frame_time());
    for frame in anim.frames() {
        let row: Vec<String> = frame.iter().map(|v| format!("{v:.6}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

fn write_joint(out: &mut String, anim: &SkeletonAnimation, index: usize, depth: usize) {
    let joint = &anim.joints()[index];
    let pad = "    ".repeat(depth);
    let keyword = if joint.parent.is_none() { "ROOT" } else { "JOINT" };
    let _ = writeln!(out, "{pad}{keyword} {}", joint.name);
    let _ = writeln!(out, "{pad}{{");
    write_offset(out, depth + 1, joint.offset);
    let tags: Vec<&str> = joint.channels.iter().map(|c| c.tag()).collect();
    let _ = writeln!(
        out,
        "{}CHANNELS {} {}",
        "    ".repeat(depth + 1),
        joint.channels.len(),
        tags.join(" ")
    );
    for (child_index, child) in anim.joints().iter().enumerate() {
        if child.parent == Some(index) {
            write_joint(out, anim, child_index, depth + 1);
        }
    }
    if let Some(end) = joint.end_site {
        let pad1 = "    ".repeat(depth + 1);
        let _ = writeln!(out, "{pad1}End Site");
        let _ = writeln!(out, "{pad1}{{");
        write_offset(out, depth + 2, end);
        let _ = writeln!(out, "{pad1}}}");
    }
    let _ = writeln!(out, "{pad}}}");
}

fn write_offset(out: &mut String, depth: usize, offset: [f64; 3]) {
    let _ = writeln!(
        out,
        "{}OFFSET {:.6} {:.6} {:.6}",
        "    ".repeat(depth),
        offset[0],
        offset[1],
        offset[2]
    );
}
