/*
==================================================================================
   Copyright (c) 2026 The pcl-slicing Authors.

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
==================================================================================
*/
#pragma once

#include "pcl/control_plane.hpp"
#include "pcl/e2_node_sim.hpp"
#include "pcl/error.hpp"
#include "pcl/experiment.hpp"
#include "pcl/forecaster/accuracy.hpp"
#include "pcl/forecaster/arima.hpp"
#include "pcl/forecaster/lstm.hpp"
#include "pcl/forecaster/model.hpp"
#include "pcl/forecaster/normalization.hpp"
#include "pcl/kpi_pipeline.hpp"
#include "pcl/pcl_rapp.hpp"
#include "pcl/plot.hpp"
#include "pcl/scenario.hpp"
#include "pcl/slice_config.hpp"
#include "pcl/traffic_model.hpp"
#include "pcl/types.hpp"
