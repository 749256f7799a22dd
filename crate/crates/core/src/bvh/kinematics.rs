use super::{BvhError, Joint, JointSet, SkeletonAnimation};
use crate::pose::PoseVector;
use crate::rotations::{Mat3, RigidTransform, UnitQuaternion};

/// Local transform of a joint at one frame: the constant offset
/// translation, then the frame's position channels, then its rotation
/// channels composed in declared order.
pub fn local_transform(joint: &Joint, frame: &[f64]) -> RigidTransform {
    let mut translation = joint.offset;
    let mut rotation = Mat3::identity();
    for (k, channel) in joint.channels.iter().enumerate() {
        let value = frame[joint.channel_base + k];
        if channel.is_rotation() {
            rotation = rotation * Mat3::rotation_about_axis(channel.axis(), value.to_radians());
        } else {
            translation[channel.axis()] += value;
        }
    }
    RigidTransform::new(rotation, translation)
}

/// Global transform of every joint at the given frame, indexed like
/// `anim.joints()`. Each joint's transform is its parent's global
/// transform composed with its local one; the root is expressed in the
/// file's global frame.
pub fn forward_kinematics(
    anim: &SkeletonAnimation,
    frame: usize,
) -> Result<Vec<RigidTransform>, BvhError> {
    if frame >= anim.frame_count() {
        return Err(BvhError::FrameOutOfRange {
            frame,
            frames: anim.frame_count(),
        });
    }
    let values = anim.frame(frame);
    let mut globals: Vec<RigidTransform> = Vec::with_capacity(anim.joints().len());
    for joint in anim.joints() {
        let local = local_transform(joint, values);
        let global = match joint.parent {
            // Parents precede children in joint order, so the parent's
            // global transform is already available.
            Some(p) => globals[p].compose(&local),
            None => local,
        };
        globals.push(global);
    }
    Ok(globals)
}

/// Child-in-parent transform: `parent_global^-1 * child_global`, so that
/// `parent_global * result == child_global`.
pub fn relative_transform(
    parent_global: &RigidTransform,
    child_global: &RigidTransform,
) -> RigidTransform {
    parent_global.inverse().compose(child_global)
}

/// Extracts the pose characterization vector at one frame: for each named
/// (parent, child) pair, the rotation of the child segment relative to its
/// parent, as a canonical quaternion.
pub fn characterize_pose_virtual(
    anim: &SkeletonAnimation,
    frame: usize,
    joints: &JointSet,
) -> Result<PoseVector, BvhError> {
    let pairs = joints.resolve(anim)?;
    let globals = forward_kinematics(anim, frame)?;
    let mut quats = [UnitQuaternion::identity(); 4];
    for (slot, (p, c)) in quats.iter_mut().zip(pairs.iter()) {
        *slot = relative_transform(&globals[*p], &globals[*c]).rotation_quat();
    }
    Ok(PoseVector::new(quats))
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse_bvh;
    use super::*;
    use crate::pose::JointId;
    use crate::rotations::{angular_offset, vec3};

    fn two_joint_anim() -> SkeletonAnimation {
        parse_bvh(
            "\
HIERARCHY
ROOT Hips
{
    OFFSET 0.0 0.0 0.0
    CHANNELS 6 Xposition Yposition Zposition Zrotation Yrotation Xrotation
    JOINT Arm
    {
        OFFSET 0.0 1.0 0.0
        CHANNELS 3 Zrotation Yrotation Xrotation
        JOINT Hand
        {
            OFFSET 0.0 0.5 0.0
            CHANNELS 3 Zrotation Yrotation Xrotation
        }
    }
}
MOTION
Frames: 3
Frame Time: 0.033333
0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0
0.0 0.0 0.0 90.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0
0.0 0.0 0.0 0.0 0.0 0.0 45.0 0.0 0.0 -30.0 0.0 0.0
",
        )
        .unwrap()
    }

    #[test]
    fn zero_channels_sum_offsets() {
        let anim = two_joint_anim();
        let globals = forward_kinematics(&anim, 0).unwrap();
        assert!(globals[0].approx_eq(&RigidTransform::identity(), 1e-12));
        assert!(vec3::norm(vec3::sub(globals[1].translation, [0.0, 1.0, 0.0])) < 1e-12);
        assert!(vec3::norm(vec3::sub(globals[2].translation, [0.0, 1.5, 0.0])) < 1e-12);
        for g in &globals {
            assert!(g.rotation.approx_eq(&Mat3::identity(), 1e-12));
        }
    }

    #[test]
    fn root_yaw_rotates_child_offset() {
        let anim = two_joint_anim();
        let globals = forward_kinematics(&anim, 1).unwrap();
        // 90 deg about z maps the (0, 1, 0) offset to (-1, 0, 0).
        assert!(vec3::norm(vec3::sub(globals[1].translation, [-1.0, 0.0, 0.0])) < 1e-12);
    }

    #[test]
    fn grandchild_matches_composed_locals() {
        let anim = two_joint_anim();
        for frame in 0..anim.frame_count() {
            let globals = forward_kinematics(&anim, frame).unwrap();
            for (i, joint) in anim.joints().iter().enumerate() {
                if let Some(p) = joint.parent {
                    let local = relative_transform(&globals[p], &globals[i]);
                    let recomposed = globals[p].compose(&local);
                    assert!(recomposed.approx_eq(&globals[i], 1e-9));
                }
            }
        }
    }

    #[test]
    fn relative_transform_contracts() {
        let t = RigidTransform::new(Mat3::rotation_about_axis(0, 0.5), [1.0, 2.0, 3.0]);
        assert!(relative_transform(&t, &t).approx_eq(&RigidTransform::identity(), 1e-12));
        let child = RigidTransform::new(Mat3::rotation_about_axis(2, -0.3), [0.0, 1.0, 0.0]);
        assert!(relative_transform(&RigidTransform::identity(), &child).approx_eq(&child, 1e-12));
    }

    #[test]
    fn frame_out_of_range() {
        let anim = two_joint_anim();
        assert!(matches!(
            forward_kinematics(&anim, 3),
            Err(BvhError::FrameOutOfRange { frame: 3, .. })
        ));
    }

    fn four_limb_joint_set() -> (SkeletonAnimation, JointSet) {
        let anim = parse_bvh(
            "\
HIERARCHY
ROOT Hips
{
    OFFSET 0.0 0.0 0.0
    CHANNELS 6 Xposition Yposition Zposition Zrotation Yrotation Xrotation
    JOINT RightForearm
    {
        OFFSET 1.0 0.0 0.0
        CHANNELS 3 Zrotation Yrotation Xrotation
        JOINT RightHand
        {
            OFFSET 0.5 0.0 0.0
            CHANNELS 3 Zrotation Yrotation Xrotation
        }
    }
    JOINT LeftForearm
    {
        OFFSET -1.0 0.0 0.0
        CHANNELS 3 Zrotation Yrotation Xrotation
        JOINT LeftHand
        {
            OFFSET -0.5 0.0 0.0
            CHANNELS 3 Zrotation Yrotation Xrotation
        }
    }
    JOINT RightShin
    {
        OFFSET 0.5 -1.0 0.0
        CHANNELS 3 Zrotation Yrotation Xrotation
        JOINT RightFoot
        {
            OFFSET 0.0 -0.5 0.0
            CHANNELS 3 Zrotation Yrotation Xrotation
        }
    }
    JOINT LeftShin
    {
        OFFSET -0.5 -1.0 0.0
        CHANNELS 3 Zrotation Yrotation Xrotation
        JOINT LeftFoot
        {
            OFFSET 0.0 -0.5 0.0
            CHANNELS 3 Zrotation Yrotation Xrotation
        }
    }
}
MOTION
Frames: 2
Frame Time: 0.033333
0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 30.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0
5.0 -2.0 1.0 75.0 -20.0 10.0 0.0 0.0 0.0 30.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0
",
        )
        .unwrap();
        (anim, JointSet::synthetic_default())
    }

    #[test]
    fn wrist_flexion_isolated_to_first_joint() {
        let (anim, joints) = four_limb_joint_set();
        let pose = characterize_pose_virtual(&anim, 0, &joints).unwrap();
        let expected =
            UnitQuaternion::from_axis_angle([0.0, 0.0, 1.0], 30f64.to_radians());
        assert!(angular_offset(pose.joint(JointId::RightWrist), expected) < 1e-9);
        for id in [JointId::LeftWrist, JointId::RightAnkle, JointId::LeftAnkle] {
            assert!(angular_offset(pose.joint(id), UnitQuaternion::identity()) < 1e-12);
        }
    }

    #[test]
    fn pose_vector_invariant_under_root_motion() {
        let (anim, joints) = four_limb_joint_set();
        let rest = characterize_pose_virtual(&anim, 0, &joints).unwrap();
        let moved = characterize_pose_virtual(&anim, 1, &joints).unwrap();
        for id in JointId::ALL {
            assert!(angular_offset(rest.joint(id), moved.joint(id)) < 1e-9);
        }
    }

    #[test]
    fn unresolvable_joint_name() {
        let (anim, _) = four_limb_joint_set();
        let joints = JointSet::new([
            ("RightForearm".into(), "NoSuchJoint".into()),
            ("LeftForearm".into(), "LeftHand".into()),
            ("RightShin".into(), "RightFoot".into()),
            ("LeftShin".into(), "LeftFoot".into()),
        ]);
        assert!(matches!(
            characterize_pose_virtual(&anim, 0, &joints),
            Err(BvhError::UnknownJoint(name)) if name == "NoSuchJoint"
        ));
    }
}
