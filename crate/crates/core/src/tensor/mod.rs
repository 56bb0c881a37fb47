//! Tensor networks: dense multi-index nodes joined along edges, contracted to
//! a tensor over the free ends. Measurement is modelled by cutting an edge
//! and inserting a ket and a bra; probabilities by doubling.

mod contract;
mod network;
mod yang_baxter;

pub use contract::{contract, contract_with, ContractConfig, ContractionOrder, Tensor, DEFAULT_BUDGET};
pub use network::{
    matrix_chain_network, trace_network, BraVector, DensityInsertion, KetVector, NetworkGraph, NodeKind, Port,
    TensorNode, DEFAULT_MAX_DIMENSION, DEFAULT_MAX_NODES,
};
pub use yang_baxter::{
    basis_insertion, check_yang_baxter, delete_braid_component, is_unitary, link_to_network, measure_component,
    measure_edge, CMatrix, CrossingTensor, LinkNetwork, MeasureReport, DEFAULT_R_TOLERANCE, NETWORK_R_TOLERANCE,
};
