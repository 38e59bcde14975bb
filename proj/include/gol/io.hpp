#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "gol/analysis.hpp"
#include "gol/longtail_data.hpp"
#include "gol/trainer.hpp"

namespace gol {

// Unknown keys and wrong types raise ParseError with the JSON path.
TrainConfig parse_train_config(std::string_view json_text);
TrainConfig load_train_config(const std::string& path);
nlohmann::json to_json(const TrainConfig& cfg);

nlohmann::json to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& doc);
RunReport load_report(const std::string& path);

// One row per epoch: stage,epoch,loss.
std::string epoch_metrics_csv(const RunReport& report);
// One row per class: class,group,train_count,accuracy,weight_norm,positive_grad_db.
std::string class_metrics_csv(const RunReport& report);

nlohmann::json to_json(const SpatialGrid& grid);
nlohmann::json to_json(const KLResult& kl);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace gol
