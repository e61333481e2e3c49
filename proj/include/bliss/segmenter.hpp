#pragma once

#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "bliss/scene.hpp"
#include "bliss/types.hpp"

namespace bliss {

/// Ground-truth labels cropped to the ROI.
SegMap oracle_segment(const LabelGrid& truth, const Roi& roi, int frame_index = 0);

/// gaze = M * [dx, dy, 1] with (dx, dy) the pupil-centre offset from `reference`;
/// row 0 of M yields the vertical angle, row 1 the horizontal angle.
struct GazeCalibration {
  PointF reference{0.0, 0.0};
  Eigen::Matrix<double, 2, 3> m = Eigen::Matrix<double, 2, 3>::Zero();

  [[nodiscard]] GazeVector apply(PointF center) const noexcept;

  /// vertical = dy, horizontal = dx.
  static GazeCalibration identity(PointF reference);
  /// Exactly the scene's analytic gaze model.
  static GazeCalibration from_model(const GazeModel& model);
};

/// Least-squares affine fit; needs at least three non-collinear centres.
GazeCalibration fit_gaze_calibration(const std::vector<PointF>& centers, const std::vector<GazeVector>& gazes,
                                     PointF reference);

/// Centroid of pupil pixel centres in full-frame coordinates.
/// Throws NoPupilError when fewer than `min_pupil_pixels` carry the pupil label.
PointF pupil_centroid(const SegMap& seg, int min_pupil_pixels = 10);
GazeVector predict_gaze(const SegMap& seg, const GazeCalibration& calib, int min_pupil_pixels = 10);

/// Component-wise absolute difference (vertical, horizontal).
GazeVector angular_error(const GazeVector& pred, const GazeVector& truth) noexcept;

/// Labels written as gray levels {0, 64, 128, 192}.
void write_segmap_pgm(const SegMap& seg, const std::filesystem::path& path);

}  // namespace bliss
