#include "bliss/segmenter.hpp"

#include <cmath>

#include "bliss/error.hpp"

namespace bliss {

SegMap oracle_segment(const LabelGrid& truth, const Roi& roi, int frame_index) {
  if (roi.x1 < 0 || roi.y1 < 0 || roi.x2 >= truth.width() || roi.y2 >= truth.height() || roi.x1 > roi.x2 ||
      roi.y1 > roi.y2) {
    throw ContractError("ROI outside the label grid");
  }
  SegMap seg{LabelGrid(roi.width(), roi.height()), roi, frame_index};
  for (int y = 0; y < roi.height(); ++y) {
    const auto src = truth.row(roi.y1 + y).subspan(static_cast<std::size_t>(roi.x1), static_cast<std::size_t>(roi.width()));
    std::copy(src.begin(), src.end(), seg.labels.row(y).begin());
  }
  return seg;
}

GazeVector GazeCalibration::apply(PointF center) const noexcept {
  const Eigen::Vector3d v(center.x - reference.x, center.y - reference.y, 1.0);
  const Eigen::Vector2d g = m * v;
  return {g(0), g(1)};
}

GazeCalibration GazeCalibration::identity(PointF reference) {
  GazeCalibration c;
  c.reference = reference;
  c.m(0, 1) = 1.0;
  c.m(1, 0) = 1.0;
  return c;
}

GazeCalibration GazeCalibration::from_model(const GazeModel& model) {
  GazeCalibration c;
  c.reference = model.rest_center;
  c.m(0, 1) = -model.deg_per_px_vertical;
  c.m(1, 0) = model.deg_per_px_horizontal;
  return c;
}

GazeCalibration fit_gaze_calibration(const std::vector<PointF>& centers, const std::vector<GazeVector>& gazes,
                                     PointF reference) {
  if (centers.size() != gazes.size()) throw ContractError("calibration needs one gaze per centre");
  if (centers.size() < 3) throw ContractError("calibration needs at least three samples");
  const auto n = static_cast<Eigen::Index>(centers.size());
  Eigen::MatrixXd a(n, 3);
  Eigen::MatrixXd b(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& c = centers[static_cast<std::size_t>(i)];
    const auto& g = gazes[static_cast<std::size_t>(i)];
    a.row(i) << c.x - reference.x, c.y - reference.y, 1.0;
    b.row(i) << g.vertical, g.horizontal;
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < 3) throw ContractError("calibration centres are collinear");
  GazeCalibration c;
  c.reference = reference;
  c.m = qr.solve(b).transpose();
  return c;
}

PointF pupil_centroid(const SegMap& seg, int min_pupil_pixels) {
  const auto pupil = static_cast<std::uint8_t>(EyeClass::pupil);
  double sx = 0.0;
  double sy = 0.0;
  long long count = 0;
  for (int y = 0; y < seg.labels.height(); ++y) {
    const auto row = seg.labels.row(y);
    for (int x = 0; x < seg.labels.width(); ++x) {
      if (row[static_cast<std::size_t>(x)] != pupil) continue;
      sx += seg.roi.x1 + x + 0.5;
      sy += seg.roi.y1 + y + 0.5;
      ++count;
    }
  }
  if (count < min_pupil_pixels) {
    throw NoPupilError("frame " + std::to_string(seg.frame_index) + " has " + std::to_string(count) +
                       " pupil pixels, need " + std::to_string(min_pupil_pixels));
  }
  return {sx / static_cast<double>(count), sy / static_cast<double>(count)};
}

GazeVector predict_gaze(const SegMap& seg, const GazeCalibration& calib, int min_pupil_pixels) {
  return calib.apply(pupil_centroid(seg, min_pupil_pixels));
}

GazeVector angular_error(const GazeVector& pred, const GazeVector& truth) noexcept {
  return {std::abs(pred.vertical - truth.vertical), std::abs(pred.horizontal - truth.horizontal)};
}

void write_segmap_pgm(const SegMap& seg, const std::filesystem::path& path) {
  Grid<std::uint8_t> image(seg.labels.width(), seg.labels.height());
  for (std::size_t i = 0; i < image.size(); ++i) image.values()[i] = static_cast<std::uint8_t>(seg.labels.values()[i] * 64);
  write_pgm(image, path);
}

}  // namespace bliss
