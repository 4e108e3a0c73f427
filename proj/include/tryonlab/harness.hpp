// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "tryonlab/dataset.hpp"
#include "tryonlab/metrics.hpp"
#include "tryonlab/objectives.hpp"
#include "tryonlab/person_representation.hpp"
#include "tryonlab/tryon_net.hpp"

namespace tryonlab {

/// One training/evaluation configuration. Serialized as key=value lines,
/// one per field, with '#' comments; unknown keys are rejected.
struct ExperimentConfig {
    std::string dataset;              // dataset root; TRYON_LAB_DATA when empty
    Split split = Split::train;      // split trained on
    Split eval_split = Split::val;   // split evaluated on
    PoseModeKind pose_mode = PoseModeKind::dense;
    int heatmap_radius = 3;          // keypoint disc radius, coco mode only
    bool attention = true;
    Activation activation = Activation::gelu;
    bool flow = false;
    int epochs = 10;
    int accumulated_batch = 64;      // samples contributing to one update
    int micro_batch = 4;             // samples per accumulation slice
    double lr = 1e-4;
    int decay_start_epoch = 5;       // linear decay to zero from here on
    bool mixed_precision = true;
    std::uint64_t seed = 0;
    LossWeights loss_weights;
    std::string out_dir = "out";
    int steps_per_epoch = 0;         // 0: auto from split size (see train)
    int base_width = 32;
    int depth = 4;
    int num_threads = 0;             // 0: hardware concurrency, capped at 8
    bool force_zero_flow_mask = false; // diagnostic: temporal blend clamped shut
};

void validate_experiment_config(const ExperimentConfig& cfg);

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::filesystem::path& path);
std::string config_to_text(const ExperimentConfig& cfg);

/// Set one field from its key=value form; raises ConfigInvalid on unknown
/// keys or unparsable values. This is the single write path used by the
/// config parser and by grid axes.
void set_config_field(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Dataset root, falling back to the TRYON_LAB_DATA environment variable.
std::filesystem::path resolve_dataset_root(const ExperimentConfig& cfg);

/// Network shape implied by a configuration. Input channels are the person
/// representation plus the warped cloth (3) and warped cloth mask (1).
TryonConfig tryon_config(const ExperimentConfig& cfg);
int input_channels(const ExperimentConfig& cfg);

/// Learning rate for a zero-based epoch index: constant before
/// decay_start_epoch, after that linear from lr down to lr/(epochs-start)
/// at the final epoch (reaching exactly zero one epoch past the end).
double lr_schedule(int epoch, const ExperimentConfig& cfg);

struct AdamState {
    std::int64_t t = 0;           // updates applied so far
    std::vector<float> m, v;      // first/second moments, visit order
};

/// One Adam update (beta1 0.9, beta2 0.999, eps 1e-8) from the gradients
/// accumulated in `grads` (visit-order layout, same length as the
/// parameter vector). `inv_scale` folds loss scaling and batch averaging.
void adam_step(TryonNetF& net, AdamState& state, const std::vector<float>& grads, double lr,
               double inv_scale);

struct Checkpoint {
    ExperimentConfig config;
    int epoch = 0;           // completed epochs
    std::int64_t step = 0;   // optimizer steps taken
    std::int64_t adam_t = 0; // updates applied (steps minus overflow skips)
    double loss_scale = 65536.0;
    int good_steps = 0;      // consecutive non-overflowing updates
    std::string rng_state;   // data-sampling stream
    std::vector<std::pair<std::string, std::size_t>> layout; // name, element count
    std::vector<float> params, m, v;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copy checkpoint parameters and moments into a freshly built net and
/// optimizer. The net's visit layout must match the stored one exactly;
/// any disagreement raises LayoutMismatch.
void apply_checkpoint(const Checkpoint& ckpt, TryonNetF& net, AdamState& adam);

struct EpochStats {
    int epoch = 0;                // 1-based, as in checkpoint filenames
    double mean_total = 0;        // weighted total loss, mean over steps
    double mean_garment_l1 = 0;   // L1 restricted to garment-region pixels
    double pipeline_seconds = 0;  // input assembly, summed across workers
    double compute_seconds = 0;   // forward/backward/update, summed across workers
    double lr = 0;
};

struct TrainResult {
    std::filesystem::path losses_csv;
    std::vector<std::filesystem::path> checkpoints; // one per epoch, in order
    std::vector<EpochStats> epochs;
    std::int64_t steps = 0;             // optimizer steps taken overall
    int skipped_steps = 0;              // loss-scale overflows (mixed precision)
    double initial_total = 0;           // first recorded step loss
    double final_total = 0;             // last recorded step loss
    std::size_t input_bytes_per_step = 0; // stacked input bytes per accumulated batch
    std::size_t pose_bytes_per_step = 0;  // pose-block share of the above
};

/// Train from scratch, or continue from `resume` (a checkpoint written by
/// a run with an identical network layout). Writes losses.csv and
/// checkpoints/epoch_%02d.ckpt under cfg.out_dir.
TrainResult train(const ExperimentConfig& cfg);
TrainResult train(const ExperimentConfig& cfg, const std::filesystem::path& resume);

/// Reconstruction inference over a split: every frame is re-rendered from
/// its own annotations and scored against itself. Flow configurations
/// chain each video sequentially, warping the previous final frame
/// forward; frame 0 bypasses the blend.
MetricReport evaluate_net(TryonNetF& net, const ExperimentConfig& cfg,
                          const DatasetManifest& manifest);

/// Load a checkpoint, run evaluate_net on `split`, and write report.json,
/// report.csv, and plots/ under out_dir.
MetricReport evaluate(const std::filesystem::path& checkpoint, const std::filesystem::path& root,
                      Split split, const std::filesystem::path& out_dir);

/// Ground truth scored against itself through the same row/aggregate path
/// as evaluate_net; every row comes out at ssim 1 and infinite psnr.
MetricReport evaluate_identity(const DatasetManifest& manifest);

/// One grid cell: the base configuration or a single-field variation.
struct GridCell {
    std::string name;   // "base" or "<axis>_<value>"
    std::string axis;   // empty for the base cell
    std::string value;
    ExperimentConfig config;
    bool ok = false;
    std::string error;  // failure text when !ok
    MetricReport report;
    TrainResult training;
};

struct GridResult {
    std::vector<GridCell> cells;
    std::filesystem::path summary_csv;
};

/// One-factor-at-a-time sweep: the base config plus, per axis, one run per
/// value that differs from the base. Cell failures are recorded and the
/// sweep continues. Writes grid_summary.csv and comparison plots under
/// out_dir; each cell trains and evaluates under out_dir/<cell name>.
GridResult run_grid(const ExperimentConfig& base,
                    const std::vector<std::pair<std::string, std::vector<std::string>>>& axes,
                    const std::filesystem::path& out_dir);

} // namespace tryonlab
