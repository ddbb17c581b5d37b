// Copyright 2026 The lcsim Developers
// SPDX-License-Identifier: Apache-2.0

pub mod oracle;
